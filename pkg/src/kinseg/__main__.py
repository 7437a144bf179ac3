import sys

from kinseg.cli import main

sys.exit(main())
