"""Physical constants.  Library code runs in Gaussian units with c = hbar = 1;
the SI values are only needed when converting for output."""

# CODATA 2018 fine-structure constant, e^2 / (hbar c) in Gaussian units.
ALPHA = 7.2973525693e-3

# Exact SI speed of light, m/s.
C_SI = 2.99792458e8

# CODATA 2018 vacuum permittivity, F/m.
EPS0_SI = 8.8541878128e-12

# Atomic unit of electric dipole moment e*a0, C m (CODATA 2018).
E_A0_SI = 8.4783536255e-30
