# main.py
import sys
from typing import Final, Optional, Sequence

from src.pitchcore.cli import EXIT_SUCCESS, EXIT_UNKNOWN_ERROR, run
from src.pitchcore.logger import setup_logger

# ────────────────────────────────────────────────────────────
# Exit code for Ctrl+C; cli.run returns the others.
EXIT_INTERRUPTED: Final[int] = 130


def main(argv: Optional[Sequence[str]] = None) -> int:
    """The main entry point for the PitchCore command line."""
    logger = setup_logger()
    logger.debug("PitchCore starting...")

    try:
        return run(argv)
    except KeyboardInterrupt:
        logger.warning("Interrupted.")
        return EXIT_INTERRUPTED
    except Exception as exc:
        logger.critical("Unexpected error: %s", exc, exc_info=True)
        return EXIT_UNKNOWN_ERROR


# ────────────────────────────────────────────────────────────
if __name__ == "__main__":
    sys.exit(main() or EXIT_SUCCESS)
