import sys

from core.cli import main

if __name__ == "__main__":
    # Dispatch to the subcommand; exit status follows the CLI contract
    sys.exit(main())
