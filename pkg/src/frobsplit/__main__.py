import sys

from frobsplit.cli import main

sys.exit(main())
