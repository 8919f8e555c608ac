import enum

ACTION_LABELS = ("ICE car", "EV", "public transport", "bicycle", "car sharing")

# Only six of the eight need units are named; the last two stay generic.
NEED_LABELS = (
    "independence",
    "security",
    "comfort",
    "cost efficiency",
    "eco-friendliness",
    "no stress",
    "need 7",
    "need 8",
)

N_TYPES = 4


class ScenarioKind(str, enum.Enum):
    REFERENCE = "Reference"
    ZERO_EMISSION_ZONE = "ZeroEmissionZone"
    TAX_EXEMPTION = "TaxExemption"
    PURCHASE_SUBSIDY = "PurchaseSubsidy"

    @classmethod
    def policies(cls):
        return (cls.ZERO_EMISSION_ZONE, cls.TAX_EXEMPTION, cls.PURCHASE_SUBSIDY)
