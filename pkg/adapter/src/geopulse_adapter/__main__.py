import sys

from geopulse_adapter.cli import main

if __name__ == "__main__":
    sys.exit(main())
