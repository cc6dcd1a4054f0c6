import sys

from levyfock.cli import main

sys.exit(main())
