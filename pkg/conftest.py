"""
Configuration file for pytest
"""
import sys
from pathlib import Path

import pytest

# Add the project root to Python path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))


QUADRIC_WEIGHTS = [[1, 0], [-1, 0], [0, 0], [0, 1]]
QUADRIC_LABELS = ["P", "P'", "Q4", "Ps"]


@pytest.fixture
def service():
    from app.services.localize import LocalizationService
    return LocalizationService()


@pytest.fixture
def quadric_action():
    """P^3 with weights (t, -t, 0, at) encoded as t -> t1, at -> t2."""
    from app.services.torusgeom import ProjectiveSpaceAction
    return ProjectiveSpaceAction.from_vectors(QUADRIC_WEIGHTS, QUADRIC_LABELS)


@pytest.fixture
def quadric_inputs():
    """Builder for the singular quadric: (action, gamma, on_x, bundles, poly, dim_x)."""
    from app.services.bundles import ChernPolynomial, pullback_bundle, tangent_bundle
    from app.services.torusgeom import (
        ProjectiveSpaceAction,
        hypersurface_class,
        projective_fixed_points,
    )
    from app.services.symalg import Character

    def build(weights=None):
        weights = weights or QUADRIC_WEIGHTS
        p, p_prime, _, p_s = weights
        rank = len(p)
        action = ProjectiveSpaceAction.from_vectors(weights, QUADRIC_LABELS)
        base = ProjectiveSpaceAction.from_vectors([p, p_prime, p_s])
        on_x = ["Ps", "P", "P'"]
        bundles = {
            "piT": pullback_bundle(
                {"P": "p0", "P'": "p1", "Ps": "p2"},
                tangent_bundle(projective_fixed_points(base)),
                on_x,
            ),
            "fT": tangent_bundle(projective_fixed_points(action)),
        }
        gamma = hypersurface_class(action, [(2, Character.zero(rank))])
        poly = ChernPolynomial.monomial(("piT", 1, 1), ("fT", 1, 1))
        return action, gamma, on_x, bundles, poly, 2

    return build
