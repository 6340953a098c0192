#!/usr/bin/env python3
"""Run the distillation simulator from a source checkout."""

__copyright__ = "Copyright (c) 2026, the gauss_distill developers"
__license__ = "BSD 3-Clause"

import sys
import gauss_distill.cli as cli


if __name__ == "__main__":
    sys.exit(cli.run())
