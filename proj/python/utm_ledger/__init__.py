"""Python bindings for the UAV traffic management ledger.

The core speaks JSON strings; this wrapper turns them into dicts.
"""

import json

from . import _core
from ._core import (
    UtmError,
    compute_rid_vc,
    congestion_surcharge,
    decode_rid,
    demo,
    dynamic_fee,
    encode_rid,
    reputation,
    update_k,
    verify_chain_log,
)

__all__ = [
    "Ledger",
    "UtmError",
    "compute_rid_vc",
    "congestion_surcharge",
    "decode_rid",
    "demo",
    "dynamic_fee",
    "encode_rid",
    "metrics_from_chain_log",
    "reputation",
    "run_scenario",
    "update_k",
    "verify_chain_log",
]


class Ledger:
    def __init__(self, config=None, *, _core_ledger=None):
        self._l = _core_ledger or _core.Ledger(json.dumps(config or {}))

    def create_account(self, role, balance=0):
        return self._l.create_account(role, balance)

    def submit(self, caller, op, args=None, value=0):
        return json.loads(self._l.submit(caller, op, json.dumps(args or {}), value))

    def set_time(self, t):
        self._l.set_time(t)

    def seal_block(self):
        block = self._l.seal_block()
        return None if block is None else json.loads(block)

    def verify_chain(self):
        return self._l.verify_chain()

    def head_hash(self):
        return self._l.head_hash()

    def balance(self, account):
        return self._l.balance(account)

    def total_supply(self):
        return self._l.total_supply()

    def active_plans(self):
        return json.loads(self._l.active_plans())

    def snapshot(self, shareable=False):
        return self._l.snapshot(shareable)

    @classmethod
    def restore(cls, text):
        return cls(_core_ledger=_core.Ledger.restore(text))

    def chain_log(self):
        return self._l.chain_log()

    def event_log(self):
        return self._l.event_log()

    @property
    def uss_contract(self):
        return self._l.uss_contract

    @property
    def uss_treasury(self):
        return self._l.uss_treasury

    @property
    def authority_contract(self):
        return self._l.authority_contract


def run_scenario(scenario, seed=None):
    """Runs a scenario (dict or JSON text); returns (metrics, chain_log, trace_csv)."""
    text = scenario if isinstance(scenario, str) else json.dumps(scenario)
    metrics, chain, trace = _core.run_scenario(text, seed)
    return json.loads(metrics), chain, trace


def metrics_from_chain_log(text):
    return json.loads(_core.metrics_from_chain_log(text))
