"""Lambda-continued fractions and the geodesic flow on Hecke triangle surfaces."""

from .cfmaps import expand_dual, expand_regular, f_q, f_q_star
from .codes import BiCode, Code, format_code, parse_code
from .context import HeckeContext, Mobius, S, make_context, mobius_word, t_power
from .domain import Partition, get_partition, natural_extension, natural_extension_inv, omega_membership
from .errors import HeckeError
from .flow import (closed_length, first_return_geometric, first_return_symbolic, section_embed,
                   simulate_returns, trace_length)
from .geometry import GeodesicEndpoints
from .measure import density_factor_map, density_fq, planar_density, total_mass_and_constant
from .reduction import closed_geodesic, reduce_endpoints, strongly_reduce

__version__ = "0.1.0"
