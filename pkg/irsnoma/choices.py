from django.db import models


class Scenario(models.TextChoices):
    NO_DIRECT_LINK = 'NO_DIRECT_LINK', 'Scenario I (no direct link)'
    WITH_DIRECT_LINK = 'WITH_DIRECT_LINK', 'Scenario II (with direct link)'


class Scheme(models.TextChoices):
    NOMA = 'NOMA', 'IRS-NOMA'
    OMA = 'OMA', 'IRS-OMA'
    FDR = 'FDR', 'FDR-NOMA'


class ExperimentKind(models.TextChoices):
    GAIN_RATIO = 'gain-ratio', 'Gain ratio'
    OUTAGE_SWEEP = 'outage-sweep', 'Outage sweep'
    DIVERSITY_FIT = 'diversity-fit', 'Diversity fit'
    BOUNDS_TABLE = 'bounds-table', 'Bounds table'


class SweepAxis(models.TextChoices):
    RHO_DB = 'rho_db', 'Transmit SNR (dB)'
    BITS = 'b', 'Resolution bits'
    ELEMENTS = 'K', 'Reflecting elements'


class CdfMode(models.TextChoices):
    UPPER_VIA_LOWER_BOUND_CDF = 'UPPER_VIA_LOWER_BOUND_CDF', 'Discrete phases (lower-bound gain)'
    CONTINUOUS_EXACT = 'CONTINUOUS_EXACT', 'Continuous phases'
