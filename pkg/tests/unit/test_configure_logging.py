import logging
from unittest.mock import MagicMock, patch

from fake_review_lab.configure_logging import (
    FILE_FORMAT,
    MAX_LOG_BYTES,
    console_handler,
    file_handler,
    setup_logging,
)


def test_console_handler_shows_info_and_above():
    handler = console_handler()
    assert handler.level == logging.INFO


def test_file_handler_creates_log_directory(tmp_path):
    log_file = tmp_path / "logs" / "app.log"

    handler = file_handler(log_file)

    try:
        assert log_file.parent.is_dir()
        assert handler.level == logging.DEBUG
        assert handler.maxBytes == MAX_LOG_BYTES
        assert handler.formatter._fmt == FILE_FORMAT
    finally:
        handler.close()


@patch("fake_review_lab.configure_logging.logging.getLogger")
def test_setup_logging_is_a_no_op_when_configured(mock_get_logger: MagicMock):
    mock_root = mock_get_logger.return_value
    mock_root.hasHandlers.return_value = True

    setup_logging(MagicMock())

    mock_root.addHandler.assert_not_called()


@patch("fake_review_lab.configure_logging.logging.captureWarnings")
@patch("fake_review_lab.configure_logging.logging.getLogger")
def test_setup_logging_attaches_both_handlers(
    mock_get_logger: MagicMock, mock_capture_warnings: MagicMock, mock_user_config
):
    mock_root = mock_get_logger.return_value
    mock_root.hasHandlers.return_value = False

    setup_logging(mock_user_config)

    handlers = [call.args[0] for call in mock_root.addHandler.call_args_list]
    try:
        assert [handler.level for handler in handlers] == [
            logging.INFO,
            logging.DEBUG,
        ]
        assert mock_user_config.log_path.parent.is_dir()
        mock_capture_warnings.assert_called_once_with(True)
    finally:
        handlers[1].close()
