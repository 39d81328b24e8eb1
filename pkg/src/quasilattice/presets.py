"""
Built-in job configurations.

Every preset is stored as configuration text, so ``presets --emit`` shows
exactly what :func:`quasilattice.config.parse_config` reads.
"""

from typing import Dict, List

from .config import JobConfig, parse_config
from .errors import ValidationError

PRESETS: Dict[str, str] = {
    "pentagonal-basic": """\
# g_k(x) = tau*x + z^k, k = 1..5
name=pentagonal-basic
field=cyclotomic(5)
beta=1+z^1+z^4
maps=roots_of_unity(5)
window=compact
rho=30
""",
    "pentagonal-scaled-2": """\
# g_k(x) = tau*x + 2z^k
name=pentagonal-scaled-2
field=cyclotomic(5)
beta=1+z^1+z^4
maps=2*roots_of_unity(5)
window=compact
rho=15
view=-2,10,-2,10
""",
    "pentagonal-negative": """\
# g_k(x) = -tau*x + z^k
name=pentagonal-negative
field=cyclotomic(5)
beta=-(1+z^1+z^4)
maps=roots_of_unity(5)
window=compact
rho=30
""",
    "hmv-decagonal": """\
# g_0(x) = tau^2*x and g_k(x) = tau^2*x + w for the tenth roots of unity w
name=hmv-decagonal
field=cyclotomic(5)
beta=(1+z^1+z^4)^2
maps=roots_of_unity(10)+{0}
window=compact
rho=30
""",
    "hmv-open-window": """\
# open window int A: the recursion starts from 0 alone
name=hmv-open-window
field=cyclotomic(5)
beta=(1+z^1+z^4)^2
maps=roots_of_unity(10)+{0}
window=seeds
seeds={0}
rho=50
""",
    "coherent-decagonal": """\
# g_k(x) = tau^2*x + z^k and g_{k+5}(x) = tau^2*x + t*z^k with t = z^1+z^4
name=coherent-decagonal
field=cyclotomic(5)
beta=(1+z^1+z^4)^2
maps=roots_of_unity(5)+(z^1+z^4)*roots_of_unity(5)
window=compact
rho=30
""",
    "coherent-decagonal-windowB": """\
# extra map g_0(x) = tau^2*x; seeds 0, t*z^k and -t^2*z^k
name=coherent-decagonal-windowB
field=cyclotomic(5)
beta=(1+z^1+z^4)^2
maps={0}+roots_of_unity(5)+(z^1+z^4)*roots_of_unity(5)
window=seeds
seeds={0}+(z^1+z^4)*roots_of_unity(5)+(-(z^1+z^4)^2)*roots_of_unity(5)
rho=30
""",
    "coherent-decagonal-open": """\
# extra map g_0(x) = tau^2*x; recursion from 0 alone
name=coherent-decagonal-open
field=cyclotomic(5)
beta=(1+z^1+z^4)^2
maps={0}+roots_of_unity(5)+(z^1+z^4)*roots_of_unity(5)
window=seeds
seeds={0}
rho=30
""",
    "four-maps": """\
# g_k(x) = tau*x + z_k with z_k in {0, 1, z, 1/z}
name=four-maps
field=cyclotomic(5)
beta=1+z^1+z^4
maps={0,1,z^1,z^4}
window=compact
rho=30
""",
    "complex-tau-z": """\
# complex Pisot unit tau*z
name=complex-tau-z
field=cyclotomic(5)
beta=(1+z^1+z^4)*z^1
maps=roots_of_unity(5)
window=compact
rho=30
""",
}


def preset_names() -> List[str]:
    return list(PRESETS)


def preset_text(name: str) -> str:
    """
    Configuration text of a preset.

    Raises:
        ValidationError: If the preset does not exist
    """
    try:
        return PRESETS[name]
    except KeyError:
        raise ValidationError(f"Unknown preset {name!r}; available: {', '.join(PRESETS)}") from None


def load_preset(name: str) -> JobConfig:
    """Parsed and validated preset."""
    return parse_config(preset_text(name))


__all__ = ["PRESETS", "preset_names", "preset_text", "load_preset"]
