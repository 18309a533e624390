#!/usr/bin/env python3
"""
shearlet-spaces command-line entry point.
Run `python app.py --help` for the subcommands.
"""
import sys

from app import run

if __name__ == '__main__':
    sys.exit(run())
