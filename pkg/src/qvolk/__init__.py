"""p-adic q-Volkenborn integration, I_q-Fourier transforms and convolution identities."""
from .padic import (
    PadicScalar, PrecisionError, PrimeContext, QConfig, arith, format_digits, from_rational,
    padic_exp, padic_log, q_bracket, q_power,
)
from .cyclotomic import (
    Character, CycloElement, CycloRing, IndistinguishableFromZero, char_eval,
    enumerate_characters, ext_valuation, make_ring,
)
from .functions import (
    ParseEnv, ParseError, derivative, derivative_at_zero, eval_fn, parse_fn, random_function,
    reflect, shift,
)
from .kernels import BACKEND, compiled_available, use_backend

__version__ = "0.1.0"
