import sys

from soliton_surfaces.cli import main

sys.exit(main())
