"""Main entry point for cfcomm."""

import sys

from cfcomm.cli import main

if __name__ == "__main__":
    sys.exit(main())
