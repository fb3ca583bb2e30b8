import sys

from tacbeam.cli import main

sys.exit(main())
