import sys

from entail_eval.harness.cli import main

sys.exit(main())
