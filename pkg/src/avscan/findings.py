"""Finding and report records shared by the rule engine and the matcher."""

from dataclasses import dataclass, field

VULN_TYPES = (
    "Reentrancy",
    "TxOriginAbuse",
    "UncheckedLowLevelCall",
    "UnexpectedRevert",
    "SelfdestructAbuse",
)

RULE_IDS = (
    "R_UnexpectedRevert",
    "R_ReentrancySlither",
    "R_TxOriginSlither",        # catalogued; engine runs the SmartCheck variant
    "R_TxOriginSmartCheck",
    "R_UncheckedLLC",
    "R_Selfdestruct",
)

DM_IDS = tuple(f"DM{i}" for i in range(1, 11))

# Which defense-mechanism filters are consulted for each vulnerability type.
DM_WIRING = {
    "Reentrancy": ("DM1", "DM2", "DM3", "DM4", "DM5"),
    "UnexpectedRevert": ("DM6", "DM7"),
    "TxOriginAbuse": ("DM8",),
    "UncheckedLowLevelCall": ("DM9",),
    "SelfdestructAbuse": ("DM10",),
}


@dataclass
class Finding:
    vuln_type: str
    contract: str
    function: str
    spans: list = field(default_factory=list)
    source: str = "rule"               # rule / avs / both
    fired_rule: str = None
    matched_avs: str = None
    suppressed_by: list = field(default_factory=list)
    match_method: str = None
    similarity: float = None
    evidence: dict = field(default_factory=dict)   # rule-internal, not serialized

    @property
    def reported(self):
        return not self.suppressed_by

    def display_function(self):
        return self.function or "<constructor-or-fallback>"

    def sort_key(self):
        first = min((s.start for s in self.spans), default=0)
        return (self.contract, self.function, self.vuln_type, first)

    def to_json(self):
        return {
            "vuln_type": self.vuln_type,
            "contract": self.contract,
            "function": self.function,
            "spans": [s.to_json() for s in self.spans],
            "source": self.source,
            "fired_rule": self.fired_rule,
            "matched_avs": self.matched_avs,
            "suppressed_by": list(self.suppressed_by),
        }
