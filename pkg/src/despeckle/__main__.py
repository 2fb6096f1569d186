"""Allow ``python -m despeckle``."""

import sys

from .cli import main

sys.exit(main())
