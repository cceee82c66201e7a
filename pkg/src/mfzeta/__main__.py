"""Module entry point: ``python -m mfzeta``."""
import sys

from .cli import main

sys.exit(main())
