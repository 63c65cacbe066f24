import pytest

from mdiqkd import ParameterVector, SystemModel

# device values of the bundled reference experiment (see data/default.cfg)
REFERENCE_DEVICE = dict(
    dark_count_rate=6.4e-8,
    detector_efficiency=0.46,
    misalignment_z=0.005,
    misalignment_x=0.04,
    fiber_loss_db_per_km=0.19,
    error_correction_efficiency=1.16,
    security_parameter=1e-10,
    pulse_count=1e12,
    clock_rate_hz=75e6,
)


def reference_model(length_a_km, length_b_km, **overrides):
    values = dict(REFERENCE_DEVICE)
    values.update(overrides)
    return SystemModel(length_a_km=length_a_km, length_b_km=length_b_km, **values)


# reference 7-intensity operating point for arm lengths (10, 62) km
SEVEN_10_62 = ParameterVector(
    s_a=0.169, mu_a=0.056, nu_a=0.011, p_sa=0.599, p_mua=0.030, p_nua=0.254,
    s_b=0.614, mu_b=0.465, nu_b=0.089, p_sb=0.600, p_mub=0.031, p_nub=0.248,
)


@pytest.fixture
def model_10_62():
    return reference_model(10, 62)
