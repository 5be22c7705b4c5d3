import os
import time
from dataclasses import replace

from ppf.engine import generate_dataset, write_timing
from ppf.management.base import GridflowCommand


class Command(GridflowCommand):
    help = 'Sample injection scenarios and solve each by Newton-Raphson into a dataset directory'

    def add_command_arguments(self, parser):
        parser.add_argument(
            '--samples',
            type=int,
            default=None,
            help='Requested sample count; overrides scenario.samples (splits keep their proportions)'
        )

    def run(self, **options):
        manager, net, case_text = self.load_from_config(options)
        run = manager.run
        spec = run.scenario
        if options['samples'] is not None:
            spec = replace(spec, samples=options['samples'])
        out_dir = os.path.join(run.output_dir, 'dataset')

        self.banner(f'Dataset generation: {net.name}, {spec.samples} {spec.sampler} samples')
        started = time.perf_counter()
        dataset = generate_dataset(
            net,
            spec,
            run.dataset.splits,
            tol=run.dataset.tolerance,
            max_iter=run.dataset.max_iter,
            threads=run.threads,
            max_diverged_fraction=run.dataset.max_diverged_fraction,
            case_text=case_text,
        )
        seconds = time.perf_counter() - started
        dataset.save(out_dir)
        write_timing(os.path.join(out_dir, 'timing.json'), seconds, threads=run.threads)

        meta = dataset.meta
        sizes = meta['split_sizes']
        self.stdout.write(f"Retained {meta['retained']} of {meta['requested']} samples "
                          f"({meta['dropped_count']} dropped) in {seconds:.2f} s")
        self.stdout.write(f"Splits: train {sizes['train']}, val {sizes['val']}, test {sizes['test']}")
        self.stdout.write(self.style.SUCCESS(f"Dataset {meta['spec_hash'][:12]} written to {out_dir}"))
        self.stdout.write('=' * 60)
