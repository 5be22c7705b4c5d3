import json
import os

import pandas as pd

from ppf.engine import paired_deltas, records_frame, write_timing
from ppf.engine._header import CSV_FLOAT_FORMAT
from ppf.management.base import SolverCommand


class Command(SolverCommand):
    help = 'Assess voltage and branch-loading violation risk over PPF samples'

    def run(self, **options):
        manager, net, _ = self.load_from_config(options)
        run = manager.run
        out_dir = os.path.join(run.output_dir, 'risk')

        self.banner(f'Risk assessment: {net.name}')
        result, reference = self.evaluate(options, manager, net)
        limits = self.limits_for(manager, net, reference or result)
        if not limits:
            self.stderr.write(self.style.WARNING('No limits configured in the risk section'))
        records = self.assess(result, limits, run.risk.threshold)
        reference_records = self.assess(reference, limits, run.risk.threshold)

        os.makedirs(out_dir, exist_ok=True)
        payload = {
            'solver': result.solver,
            'samples': result.samples,
            'dropped': int(len(result.dropped)),
            'threshold': run.risk.threshold,
            'violations': [r.to_dict() for r in records],
        }
        if reference is not None:
            payload['reference'] = reference.solver
            payload['reference_violations'] = [r.to_dict() for r in reference_records]
            payload['paired'] = paired_deltas(records, reference_records)
        with open(os.path.join(out_dir, 'risk.json'), 'w', encoding='utf-8') as f:
            json.dump(payload, f, indent=2, sort_keys=True, allow_nan=False)
            f.write('\n')
        frame = records_frame(records).assign(solver=result.solver)
        if reference is not None:
            frame = pd.concat([frame, records_frame(reference_records).assign(solver=reference.solver)], ignore_index=True)
        frame.to_csv(os.path.join(out_dir, 'violations.csv'), index=False, float_format=CSV_FLOAT_FORMAT)
        write_timing(
            os.path.join(out_dir, 'timing.json'),
            result.seconds,
            reference.seconds if reference is not None else None,
            solver=result.solver,
        )

        worst = sorted(records, key=lambda r: r.probability, reverse=True)[:5]
        for r in worst:
            status = 'converged' if r.converged else 'not converged'
            self.stdout.write(f'{r.quantity} {r.direction} {r.bound:.4f}: p = {r.probability:.4f} '
                              f'[{r.ci_low:.4f}, {r.ci_high:.4f}] ({status})')
        self.stdout.write(self.style.SUCCESS(f'risk.json and violations.csv written to {out_dir}'))
        self.stdout.write('=' * 60)
