import sys

from auctionlab.cli import main

sys.exit(main())
