import logging
import os

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from analytics.computation import init_jacobian, init_linearized_pf, ridge_fit
from gridflow.exceptions import GridflowError
from network.case_io import Network, parse_case
from surrogate.checkpoint import load_checkpoint

from ..config_manager import RunConfigManager
from ..engine import Dataset, build_limits, limit_matrix, risk_assess, run_mcs, sample_injections

logger = logging.getLogger(__name__)


class GridflowCommand(BaseCommand):
    """
    Shared options and the exit-code contract: GridflowError subclasses exit
    with their ``exit_code``; unreadable files exit 1.
    """

    requires_system_checks = []
    uses_config = True

    def add_arguments(self, parser):
        parser.add_argument('--case', type=str, default=None, help='Case file (.m); overrides the config')
        if self.uses_config:
            parser.add_argument(
                '--config',
                type=str,
                default='ieee30.gauss.json',
                help='Run config file or bundled config name (default: ieee30.gauss.json)'
            )
        parser.add_argument('--out', type=str, default=None, help='Output directory')
        parser.add_argument('--seed', type=int, default=None, help='Random seed; overrides the config')
        parser.add_argument(
            '--threads',
            type=int,
            default=None,
            help=f"Worker cap (default: GRIDFLOW_THREADS={settings.GRIDFLOW['THREADS']})"
        )
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def handle(self, *args, **options):
        try:
            self.run(**options)
        except GridflowError as e:
            logger.error(f"{self.__module__.rsplit('.', 1)[-1]} failed: {e.code}: {e.message}")
            raise CommandError(f"{e.code}: {e.message}", returncode=e.exit_code) from e
        except OSError as e:
            logger.error(f"{self.__module__.rsplit('.', 1)[-1]} failed: {e}")
            raise CommandError(f"IO_ERROR: {e}", returncode=1) from e
        except Exception as e:
            logger.error(f"Unexpected error: {e}", exc_info=True)
            raise

    def run(self, **options):
        raise NotImplementedError

    # helpers

    def banner(self, title: str):
        self.stdout.write(self.style.SUCCESS('=' * 60))
        self.stdout.write(self.style.SUCCESS(title))
        self.stdout.write(self.style.SUCCESS('=' * 60))

    def load_config(self, options) -> RunConfigManager:
        return RunConfigManager(
            options['config'],
            overrides={
                'case': options.get('case'),
                'seed': options.get('seed'),
                'threads': options.get('threads'),
                'output_dir': options.get('out'),
            },
        )

    def load_case(self, path: str, bprime_mode: str = 'series') -> tuple[Network, str]:
        """Parsed network plus the raw case text (part of the dataset hash)."""
        try:
            with open(path, 'r', encoding='utf-8') as f:
                text = f.read()
        except FileNotFoundError as e:
            error_msg = f"Case file not found: {path}"
            logger.error(error_msg)
            raise FileNotFoundError(error_msg) from e
        name = os.path.splitext(os.path.basename(path))[0]
        return parse_case(text, name=name, bprime_mode=bprime_mode), text

    def load_from_config(self, options):
        manager = self.load_config(options)
        net, text = self.load_case(manager.resolve_case_path(), manager.run.bprime)
        return manager, net, text


class SolverCommand(GridflowCommand):
    """Commands that evaluate a solver (NR, checkpoint or affine model) over PPF samples."""

    def add_command_arguments(self, parser):
        solver = parser.add_mutually_exclusive_group()
        solver.add_argument('--model', type=str, default=None, help='Residual net checkpoint to evaluate')
        solver.add_argument(
            '--affine',
            type=str,
            choices=['lpf', 'jac', 'data'],
            default=None,
            help='Evaluate a standalone affine model instead of a checkpoint'
        )
        parser.add_argument('--dataset', type=str, default=None, help='Dataset directory for --affine data')
        parser.add_argument('--samples', type=int, default=None, help='PPF sample count; overrides ppf.samples')
        parser.add_argument(
            '--compare',
            type=str,
            choices=['nr'],
            default=None,
            help='Also run the NR baseline on the identical sample set'
        )

    def load_solver(self, options, manager, net):
        if options['model']:
            return load_checkpoint(options['model'])
        run = manager.run
        if options['affine'] == 'lpf':
            return init_linearized_pf(net)
        if options['affine'] == 'jac':
            return init_jacobian(net, run.dataset.tolerance, run.dataset.max_iter)
        if options['affine'] == 'data':
            dataset = Dataset.load(options['dataset'] or os.path.join(run.output_dir, 'dataset'))
            X, Y = dataset.split('train')
            return ridge_fit(X, Y, run.ridge.penalty(X.shape[0]), standardize=run.ridge.standardize)
        return 'nr'

    def evaluate(self, options, manager, net):
        """Solver result and, when NR is compared or is the solver, the NR result on the same rows."""
        run = manager.run
        solver = self.load_solver(options, manager, net)
        X = sample_injections(net, manager.get_ppf_scenario(options['samples']))
        nr_kwargs = dict(
            tol=run.dataset.tolerance,
            max_iter=run.dataset.max_iter,
            threads=run.threads,
            max_diverged_fraction=run.dataset.max_diverged_fraction,
        )
        if isinstance(solver, str):
            return run_mcs(net, None, 'nr', X=X, **nr_kwargs), None
        reference = None
        if options['compare'] == 'nr':
            reference = run_mcs(net, None, 'nr', X=X, **nr_kwargs)
            X = reference.X
        return run_mcs(net, None, solver, X=X), reference

    def limits_for(self, manager, net, basis):
        opts = manager.run.risk
        return build_limits(
            net,
            basis.vm,
            vm_lower=opts.vm_lower,
            vm_upper=opts.vm_upper,
            vm_lower_percentile=opts.vm_lower_percentile,
            branch_rate=opts.branch_rate,
        )

    @staticmethod
    def assess(result, limits, threshold):
        if result is None or not limits:
            return []
        return risk_assess(limit_matrix(result.vm, result.flows.s_mva), limits, threshold)
