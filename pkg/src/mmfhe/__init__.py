"""Multi-modal FHE workbench: RNS-CKKS, TFHE over NTT-friendly primes,
CKKS/TFHE scheme conversion, and a cycle-level accelerator model."""

__version__ = "0.1.0"
