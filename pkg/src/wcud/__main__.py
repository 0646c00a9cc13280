import sys

from wcud.cli import main

sys.exit(main())
