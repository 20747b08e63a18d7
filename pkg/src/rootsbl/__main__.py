import sys

from rootsbl.simharness.cli import main

sys.exit(main())
