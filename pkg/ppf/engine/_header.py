HALTON_SKIP = 409
MAX_DIVERGED_FRACTION = 0.01
MAPE_EPSILON = 1e-6
KDE_POINTS = 512
KDE_PAD_BANDWIDTHS = 5.0
VARIANCE_COEFFICIENT_THRESHOLD = 0.01
Z_95 = 1.96
WARMUP_ROWS = 32

SAMPLERS = ('mc', 'qmc')
GAUSSIAN_QUANTITIES = ('generation', 'load')
CSV_FLOAT_FORMAT = '%.17g'
