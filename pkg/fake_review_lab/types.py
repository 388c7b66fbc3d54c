from pathlib import Path
from typing import Callable, Optional

import numpy as np
from sqlalchemy.orm import Session

from fake_review_lab.corpus import ReviewCorpus
from fake_review_lab.featurizer import FeatureTable
from fake_review_lab.learner.model_spec import ModelSpec
from fake_review_lab.learner.validation import CVConfig, CVResult

LoadCorpusFn = Callable[[Path | str, bool, Optional[Path | str]], ReviewCorpus]
FeaturizeFn = Callable[[ReviewCorpus, int], FeatureTable]
ReadFeaturesFn = Callable[[Path | str], FeatureTable]
SessionFn = Callable[[str | Path], Session]
CreateDbFn = Callable[[str | Path], None]
CrossValidateFn = Callable[[np.ndarray, np.ndarray, ModelSpec, CVConfig], CVResult]
