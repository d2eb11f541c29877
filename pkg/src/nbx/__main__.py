import sys

from nbx.cli import main

sys.exit(main())
