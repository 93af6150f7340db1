import sys

from cgneg.cli import main

sys.exit(main())
