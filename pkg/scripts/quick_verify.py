"""
Two-site closed-form check of the whole pipeline.

U_F = (1 - i lam R)(1 - i lam L) = [[1, -i lam], [-i lam, 1 - lam^2]] and its
eigenvalues solve xi^2 - (2 - lam^2) xi + 1 = 0.
"""

import numpy as np
from dotenv import load_dotenv

from models.lattice import LatticeSpec
from services.floquet_engine import evolve_protocol, floquet_spectrum
from services.lattice.minimal_model import build_minimal


def verify():
    load_dotenv()
    spec = LatticeSpec(sites=2, eta=0.0)

    for lam in (0.5, 1.0, 1.9, 2.5):
        protocol = build_minimal(spec, t=2.0 * lam, T=1.0)
        u_f = evolve_protocol(protocol)
        expected = np.array([[1.0, -1j * lam], [-1j * lam, 1.0 - lam ** 2]])
        roots = np.sort_complex(np.roots([1.0, -(2.0 - lam ** 2), 1.0]))
        result = floquet_spectrum(protocol)

        u_error = np.abs(u_f - expected).max()
        xi_error = np.abs(np.sort_complex(result.floquet_eigs) - roots).max()
        status = "OK" if max(u_error, xi_error) < 1e-10 else "FAIL"
        print(f"lam={lam:<4} |U_F error|={u_error:.1e} |xi error|={xi_error:.1e} "
              f"E={np.round(result.quasienergies, 6)} {status}")


if __name__ == "__main__":
    verify()
