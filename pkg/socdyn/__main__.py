import sys

from socdyn.cli import main

sys.exit(main())
