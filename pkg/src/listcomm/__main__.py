import sys

from listcomm.cli import main

sys.exit(main())
