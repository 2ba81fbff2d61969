"""
Data schemas for JSON payloads and report tables.
All loaders and writers use these field names.
"""

# Matrix payload
MATRIX_SCHEMA = {
    'n': int,                    # Row count (square matrices only)
    'mode': str,                 # exact/float (may be left out when --mode is given)
    'entries': list,             # Rows of [re, im] pairs; exact parts are "p/q" strings
}

# Irregular type payload
IRREGULAR_SCHEMA = {
    'n': int,                    # Matrix size
    'coeffs': list,              # Diagonal of Q_j per order j = 1..r
}

# Levi chain payload
CHAIN_SCHEMA = {
    'partitions': list,          # Block sizes of pi_1..pi_r (pi_j refines pi_j+1)
}

# Unfolding parameters payload
PARAMS_SCHEMA = {
    'ts': list,                  # Matrix payloads t_1..t_r
    'chain': dict,               # CHAIN_SCHEMA payload
}

# Space point payload (multi-fission layout C, h, u_1..u_2r)
POINT_SCHEMA = {
    'slots': list,               # Matrix payloads
}

# Representation point payload
REP_POINT_SCHEMA = {
    'handles': list,             # [[A_l, B_l], ...]
    'marked': list,              # One POINT_SCHEMA payload per marked point
}

# Curve payload
CURVE_SCHEMA = {
    'genus': int,                # g >= 0
    'n': int,                    # Matrix size
    'marked': list,              # {irregular?, chain?, params?, class_rep?, stokes?} per marked point
}

# Verification residual rows
RESIDUAL_SCHEMA = {
    'suite': str,                # qh2/triangular/unfold/wcv/stokes
    'check': str,                # Name of the identity being checked
    'n': int,                    # Matrix size of the trial
    'trial': int,                # Trial index (seeded)
    'residual': float,           # |residual| (0 exactly in exact mode)
    'ok': bool,                  # Within tolerance
}

# Singular direction table
DIRECTION_SCHEMA = {
    'index': int,                # 1-based label d_1 < d_2 < ...
    'angle': float,              # Radians in [0, 2 pi)
    'unit': str,                 # exp(-i d) when Gaussian rational, else blank
    'roots': str,                # Supporting roots, 1-based "(k,l)"
    'dim': int,                  # Dimension of the Stokes group
}


def require_keys(payload: dict, schema: dict, what: str, optional: tuple = ()) -> None:
    """
    optional names schema keys the caller can supply itself.

    Raises:
        ValueError: If payload is not a dict or misses schema keys
    """
    if not isinstance(payload, dict):
        raise ValueError(f"{what} must be a JSON object")
    missing = [k for k in schema if k not in payload and k not in optional]
    if missing:
        raise ValueError(f"{what} is missing required fields: {', '.join(missing)}")
