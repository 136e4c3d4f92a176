"""Robust stability certificates for queue-ratio policies in multiclass queueing networks."""

from .certifier import Verdict, certify_full, certify_sp, scan_region
from .network import NetworkPrimitives, build_dhv, build_lu_kumar, build_push_started_lu_kumar, load_network
from .reflection import reflection

__all__ = [
    "NetworkPrimitives",
    "Verdict",
    "build_dhv",
    "build_lu_kumar",
    "build_push_started_lu_kumar",
    "certify_full",
    "certify_sp",
    "load_network",
    "reflection",
    "scan_region",
]
