"""Module running the command line with `python -m emitterkit`."""

import sys

from emitterkit.cli import main

sys.exit(main())
