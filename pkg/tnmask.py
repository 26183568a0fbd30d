#!/usr/bin/env python3
"""
Main entry point for the Transposable N:M Mask Toolkit.

Usage:
    python tnmask.py solve --input w.csv --pattern 2:4 --output w.mask.tnm
    python tnmask.py bench --n 8 --m 16 --solvers tsenor,greedy2
    python tnmask.py verify --mask w.mask.tnm --pattern 2:4 --transposable
"""

import sys
from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
