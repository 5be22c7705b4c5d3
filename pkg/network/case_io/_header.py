# MATPOWER column positions (0-based) for the supported subset.

BUS_I, BUS_TYPE, PD, QD, GS, BS, BUS_AREA, VM, VA, BASE_KV, ZONE, VMAX, VMIN = range(13)
BUS_COLUMNS = 13

GEN_BUS, PG, QG, QMAX, QMIN, VG, MBASE, GEN_STATUS = range(8)
GEN_COLUMNS = 6

F_BUS, T_BUS, BR_R, BR_X, BR_B, RATE_A, RATE_B, RATE_C, TAP, SHIFT, BR_STATUS = range(11)
BRANCH_COLUMNS = 11

SLACK_TYPE = 3
PV_TYPE = 2
PQ_TYPE = 1

REQUIRED_BLOCKS = ('bus', 'gen', 'branch')

BPRIME_MODES = ('series', 'reactance')
