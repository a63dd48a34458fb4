import sys

from heats.cli import main

sys.exit(main())
