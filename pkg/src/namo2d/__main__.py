import sys
from namo2d.cli import main
sys.exit(main())
