import logging

logger: logging.Logger = logging.getLogger("levyfock")


def configure_logging(level: int = logging.INFO) -> None:
    """Install the package log format; called once by the command line entry point."""
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    logger.setLevel(level)
