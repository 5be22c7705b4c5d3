LU_PIVOT_TOLERANCE = 1e-13  # relative to ||A||_inf
PINV_RCOND = 1e-10  # relative to the largest singular value
PSD_JITTER = 1e-10

NR_TOLERANCE = 1e-8  # p.u. mismatch, infinity norm
NR_MAX_ITER = 20
NR_GROWTH_LIMIT = 3  # consecutive mismatch increases before giving up

RIDGE_LAMBDA_PER_SAMPLE = 1e-3
