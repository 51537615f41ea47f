#!/usr/bin/env python3
"""
Kommandozeile für netrobust.
Startet die Subcommands aus netrobust.cli.
"""

import sys

from netrobust.cli import main

if __name__ == '__main__':
    sys.exit(main())
