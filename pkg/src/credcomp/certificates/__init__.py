from .certfile import CertSyntaxError, parse_cert, print_cert
from .checker import check, check_entry
from .generate import GENERATORS, gen_cert_cp, gen_cert_uce, gen_cert_uce_dae
from .model import (
    Accepted,
    Certificate,
    ConstS,
    ConstT,
    EqArr,
    EqVar,
    Rejected,
    Verdict,
)
from .symbolic import simplify

__all__ = [
    "Accepted",
    "Certificate",
    "CertSyntaxError",
    "ConstS",
    "ConstT",
    "EqArr",
    "EqVar",
    "GENERATORS",
    "Rejected",
    "Verdict",
    "check",
    "check_entry",
    "gen_cert_cp",
    "gen_cert_uce",
    "gen_cert_uce_dae",
    "parse_cert",
    "print_cert",
    "simplify",
]
