#!/usr/bin/env python3
"""
cissrp - CISS-parameterized radical-pair coherence simulator

Entry point for the cissrp command-line application.
"""

from src.application import main

if __name__ == "__main__":
    main()
