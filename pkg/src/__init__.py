"""cissrp - CISS-parameterized radical-pair coherence simulator"""

__version__ = "1.0.0"
