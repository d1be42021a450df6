"""Allow `python -m parnncp`."""

import sys

from parnncp.cli import main

if __name__ == "__main__":
    sys.exit(main())
