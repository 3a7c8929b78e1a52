import sys

from habc.cli import main

sys.exit(main())
