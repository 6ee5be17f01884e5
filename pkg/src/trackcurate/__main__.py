import sys

from trackcurate.cli import main

sys.exit(main())
