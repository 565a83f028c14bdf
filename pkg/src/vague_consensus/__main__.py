import sys

from vague_consensus.cli import main

sys.exit(main())
