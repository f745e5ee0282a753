"""Sunflower certificates: construction and petal verification"""

from .cert import SunflowerCert, build_cert
from .formats import dumps_cert, loads_cert, read_cert, write_cert
from .verify import CertVerdict, PetalVerdict, sequence_count, verify_cert, verify_petal

__all__ = [
    "CertVerdict",
    "PetalVerdict",
    "SunflowerCert",
    "build_cert",
    "dumps_cert",
    "loads_cert",
    "read_cert",
    "sequence_count",
    "verify_cert",
    "verify_petal",
    "write_cert",
]
