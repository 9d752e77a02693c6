import sys

from mzsphere.cli import main

sys.exit(main())
