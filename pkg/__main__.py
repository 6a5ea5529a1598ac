"""
smooshlab - entry point for running as a module.

Usage:
    python -m smooshlab constants --delta 0.3
    python -m smooshlab simulate --preset fig2 --out runs
    python -m smooshlab couple --set model=lattice1d --set m=4 --replicas 1000
    python -m smooshlab mixing-curve --set m=3 --replicas 20000
    python -m smooshlab verify --fast
"""

import sys

from console.interface import main

if __name__ == "__main__":
    sys.exit(main())
