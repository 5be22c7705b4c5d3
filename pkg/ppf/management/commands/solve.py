import os

import numpy as np
import pandas as pd
from django.conf import settings

from analytics.computation import base_injections, branch_flows, mismatch, newton_raphson, power_injections
from network.case_io._header import BPRIME_MODES
from ppf.engine._header import CSV_FLOAT_FORMAT
from ppf.management.base import GridflowCommand


class Command(GridflowCommand):
    help = 'Solve the base-case AC power flow of a case file by Newton-Raphson'
    uses_config = False

    def add_command_arguments(self, parser):
        parser.add_argument(
            '--tol',
            type=float,
            default=settings.GRIDFLOW['NR_TOLERANCE'],
            help='Mismatch infinity-norm tolerance in p.u. (default: 1e-8)'
        )
        parser.add_argument(
            '--max-iter',
            type=int,
            default=settings.GRIDFLOW['NR_MAX_ITER'],
            help='Iteration cap (default: 20)'
        )
        parser.add_argument('--bprime', type=str, choices=BPRIME_MODES, default='series')

    def _case_path(self, case):
        if case is None:
            case = 'case30.m'
        if not os.path.isfile(case) and not os.path.isabs(case):
            bundled = os.path.join(settings.GRIDFLOW['CASE_DIR'], case)
            if os.path.isfile(bundled):
                return bundled
        return case

    def run(self, **options):
        net, _ = self.load_case(self._case_path(options['case']), options['bprime'])
        out_dir = options['out'] or os.path.join('runs', f'solve_{net.name}')

        self.banner(f'AC power flow: {net.name} ({net.n_bus} buses, {len(net.branches)} branches)')
        x = base_injections(net)
        state, iterations = newton_raphson(net, x, tol=options['tol'], max_iter=options['max_iter'])
        residual = float(np.max(np.abs(mismatch(net, x, state)))) if x.size else 0.0
        self.stderr.write(f'Converged in {iterations} iterations, mismatch inf-norm {residual:.3e} p.u.')

        os.makedirs(out_dir, exist_ok=True)
        P, Q = power_injections(net, state)
        solution = pd.DataFrame({
            'bus': net.bus_ids,
            'type': [bus.kind.value for bus in net.buses],
            'Vm': state.vm,
            'Va_rad': state.theta,
            'P': P,
            'Q': Q,
        })
        solution.to_csv(os.path.join(out_dir, 'solution.csv'), index=False, float_format=CSV_FLOAT_FORMAT)

        flows = branch_flows(net, state)
        ids = np.asarray(net.bus_ids)
        table = pd.DataFrame({
            'branch': np.arange(1, len(net.branches) + 1),
            'from_bus': ids[net.branch_from],
            'to_bus': ids[net.branch_to],
            'pf': flows.pf,
            'qf': flows.qf,
            'pt': flows.pt,
            'qt': flows.qt,
            's_mva': flows.s_mva,
            'rate_a': net.rate_a,
        })
        table.to_csv(os.path.join(out_dir, 'flows.csv'), index=False, float_format=CSV_FLOAT_FORMAT)

        self.stdout.write(self.style.SUCCESS(f'Wrote solution.csv and flows.csv to {out_dir}'))
        self.stdout.write('=' * 60)
