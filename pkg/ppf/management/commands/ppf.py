import os

from gridflow.exceptions import InvalidReport
from ppf.engine import build_report, validate_report, write_report
from ppf.management.base import SolverCommand


class Command(SolverCommand):
    help = 'Probabilistic power flow: sample scenarios, evaluate a solver and write the PPF report'

    def run(self, **options):
        manager, net, _ = self.load_from_config(options)
        run = manager.run
        out_dir = os.path.join(run.output_dir, 'ppf')

        self.banner(f'Probabilistic power flow: {net.name}')
        result, reference = self.evaluate(options, manager, net)
        limits = self.limits_for(manager, net, reference or result)
        report = build_report(
            net,
            result,
            reference=reference,
            kde_quantities=manager.get_kde_quantities(),
            kde_points=run.ppf.kde_points,
            variance_counts=run.ppf.variance_counts,
            mape_epsilon=run.ppf.mape_epsilon,
            violations=self.assess(result, limits, run.risk.threshold),
            reference_violations=self.assess(reference, limits, run.risk.threshold),
        )
        check = validate_report(report.to_dict())
        if not check['valid']:
            raise InvalidReport(check['error'], check['code'])
        write_report(report, out_dir)

        self.stdout.write(f'{report.solver}: {report.samples} samples, {report.dropped} dropped, {report.seconds:.4f} s')
        if report.reference is not None:
            self.stdout.write(f'ARMSE angle {report.armse_angle:.3e} rad, magnitude {report.armse_vm:.3e} p.u.')
            self.stdout.write(f'AWD angle {report.awd_angle:.3e} rad, magnitude {report.awd_vm:.3e} p.u.')
            if report.acceleration_ratio is not None:
                self.stdout.write(f'Acceleration ratio {report.acceleration_ratio:.1f}')
        self.stdout.write(self.style.SUCCESS(f'Report written to {out_dir}'))
        self.stdout.write('=' * 60)
