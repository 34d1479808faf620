"""Porosity, Ahlfors regularity and regular envelopes of finite point samples."""

from .corpus import (FractalSpec, GroundTruth, ambient_measure, fractal_spec, generate,
                     similarity_dimension)
from .covering import NetResult, PackingCoverReport, greedy_net, verify_packing_cover
from .envelope import (Envelope, EnvelopeParams, construct_envelope, count_intersections,
                       check_counting_bound, plant_regular_set, porosity_bound_from_regularity,
                       verify_envelope, verify_nu_bound)
from .errors import PorosityLabError
from .manifest import Manifest
from .porosity import (annulus_series, decay_profile, delta_theory, gamma_value,
                       neighborhood_mass, porosity_at, uniform_porosity, verify_recursion)
from .regularity import (ScaleGrid, check_doubling_power, estimate_doubling,
                         fit_regularity)
from .space import (BallIndex, MetricSpace, SubsetRef, WeightedMeasure, ball_mass,
                    ball_points, dist_to_set, distance, set_distances)

__version__ = "0.1.0"
