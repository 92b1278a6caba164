import sys

from rci_bounds.main import main

if __name__ == "__main__":
    sys.exit(main())
