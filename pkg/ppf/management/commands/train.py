import json
import os

from analytics.computation import predict
from gridflow.exceptions import DimensionMismatch
from ppf.engine import Dataset
from ppf.engine._header import CSV_FLOAT_FORMAT
from ppf.engine.metrics import armse
from ppf.management.base import GridflowCommand
from surrogate.checkpoint import load_checkpoint, save_checkpoint
from surrogate.resnet import InitScheme, infer, init_net
from surrogate.training import dataset_mse, train


class Command(GridflowCommand):
    help = 'Initialize and train a residual surrogate on a generated dataset'

    def add_command_arguments(self, parser):
        parser.add_argument('--dataset', type=str, default=None, help='Dataset directory (default: <out>/dataset)')
        parser.add_argument(
            '--scheme',
            type=str,
            choices=[s.value for s in InitScheme],
            default=InitScheme.LPF.value,
            help='Shortcut initialization scheme (default: lpf)'
        )
        parser.add_argument('--epochs', type=int, default=None, help='Maximum epochs; overrides the config')
        parser.add_argument('--learning-rate', type=float, default=None, help='Adam step size; overrides the config')
        parser.add_argument('--resume', type=str, default=None, help='Continue training from this checkpoint')

    def run(self, **options):
        manager, net, _ = self.load_from_config(options)
        run = manager.run
        dataset = Dataset.load(options['dataset'] or os.path.join(run.output_dir, 'dataset'))
        if dataset.X.shape[1] != net.dimension:
            raise DimensionMismatch(f"dataset width {dataset.X.shape[1]} does not match {net.name} ({net.dimension})")
        X_train, Y_train = dataset.split('train')
        X_val, Y_val = dataset.split('val')
        cfg = manager.get_train_config(options['epochs'], options['learning_rate'])

        if options['resume']:
            model = load_checkpoint(options['resume'])
            scheme = next(s.value for s in InitScheme if s.provenance is model.provenance)
            if model.spec.width != net.dimension:
                raise DimensionMismatch(f"checkpoint width {model.spec.width} does not match {net.name} ({net.dimension})")
        else:
            scheme = options['scheme']
            model = init_net(
                manager.get_net_spec(net),
                scheme,
                net=net,
                X=X_train,
                Y=Y_train,
                seed=run.seed,
                ridge_lambda=run.ridge.penalty(X_train.shape[0]),
                standardize=run.ridge.standardize,
            )
        out_dir = os.path.join(run.output_dir, scheme)
        os.makedirs(out_dir, exist_ok=True)

        self.banner(f'Training {list(model.spec.layer_sizes)} net, {model.provenance.value} shortcut')
        best, trace = train(model, (X_train, Y_train), (X_val, Y_val), cfg)

        save_checkpoint(best, os.path.join(out_dir, 'model.ckpt'), metadata={
            'case': net.name,
            'dataset': dataset.meta.get('spec_hash'),
            'scheme': scheme,
        })
        trace.to_frame().to_csv(os.path.join(out_dir, 'trace.csv'), index=False, float_format=CSV_FLOAT_FORMAT)

        summary = {
            'scheme': scheme,
            'provenance': best.provenance.value,
            'seed': run.seed,
            'epochs': trace.epochs,
            'best_epoch': trace.best_epoch,
            'stop_reason': trace.stop_reason,
            'initial_train_mse': trace.initial_train_mse,
            'initial_val_mse': trace.initial_val_mse,
            'best_val_mse': trace.best_val_mse[-1] if trace.best_val_mse else trace.initial_val_mse,
            'shortcut_val_armse': armse(predict(best.shortcut, X_val), Y_val),
        }
        if len(dataset.splits.get('test', ())):
            X_test, Y_test = dataset.split('test')
            summary['test_mse'] = dataset_mse(best, X_test, Y_test)
            summary['test_armse'] = armse(infer(best, X_test), Y_test)
        with open(os.path.join(out_dir, 'summary.json'), 'w', encoding='utf-8') as f:
            json.dump(summary, f, indent=2, sort_keys=True)
            f.write('\n')

        first = trace.train_mse[0] if trace.train_mse else float('nan')
        self.stdout.write(f'Epoch-1 train MSE {first:.3e}; best val MSE {summary["best_val_mse"]:.3e} '
                          f'at epoch {trace.best_epoch} ({trace.stop_reason})')
        self.stdout.write(self.style.SUCCESS(f'Checkpoint, trace.csv and summary.json written to {out_dir}'))
        self.stdout.write('=' * 60)
