"""
Root logger to be shared and used by all command line programs.

Example usage::

    from n3h_dse.root_logger import init_logger
    ...
    logger = logging.getLogger(__name__)
    ...
    if __name__ == "__main__":
        init_logger(__file__)
"""
import logging

import sys

LOG_FORMAT = "%(asctime)s [%(threadName)s] [%(name)s] [%(levelname)s] %(message)s"

root_logger = logging.getLogger()


def init_logger(context: str,
                level: int = logging.INFO):
    # only attach one console handler even when several commands run in one process
    if not any(getattr(handler, "n3h_console", False) for handler in root_logger.handlers):
        console_handler = logging.StreamHandler(sys.stdout)
        console_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        console_handler.n3h_console = True
        root_logger.addHandler(console_handler)
    root_logger.setLevel(level)
    root_logger.info(f'root logger initialized from {context}')
