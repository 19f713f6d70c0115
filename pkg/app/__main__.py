"""python -m app"""
import sys

from app.presentation.cli import main

if __name__ == "__main__":
    sys.exit(main())
