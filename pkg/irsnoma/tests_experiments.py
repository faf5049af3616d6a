import math
import shutil
import tempfile
from io import StringIO
from pathlib import Path

from django.contrib.auth.models import User
from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import TestCase, tag
from django.urls import reverse
from openpyxl import load_workbook

from irsnoma.choices import ExperimentKind, Scenario, Scheme, SweepAxis
from irsnoma.exceptions import ConfigError, InsufficientData, SimulationError
from irsnoma.experiments import (
    CSV_HEADER,
    DEFAULT_FIXED_RHO_DB,
    DEFAULT_OUTAGE_TRIALS,
    DEFAULT_RATIO_TRIALS,
    DEFAULT_RHO_DB,
    ResultRow,
    fit_diversity,
    load_config,
    read_csv,
    record_run,
    run,
)
from irsnoma.export import XLSX_CONTENT_TYPE
from irsnoma.models import ExperimentRun, SweepResult

CONFIGS_DIR = settings.BASE_DIR / "configs"

OUTAGE_CONFIG = """
experiment = outage-sweep
scenario = I
trials = 10000
seed = 7
"""

GAIN_RATIO_CONFIG = """
experiment = gain-ratio
sweep = b
values = 1, 2, 3, inf
trials = 20000
"""


class ConfigDirMixin:
    def setUp(self):
        super().setUp()
        self.tmp = Path(tempfile.mkdtemp())

    def tearDown(self):
        shutil.rmtree(self.tmp, ignore_errors=True)
        super().tearDown()

    def write_config(self, text, name='experiment.env'):
        path = self.tmp / name
        path.write_text(text, encoding='utf-8')
        return path

    def load(self, text, **overrides):
        overrides.setdefault('out', str(self.tmp / 'results.csv'))
        return load_config(self.write_config(text), **overrides)


def synthetic_rows(slope, rho_dbs, failures=1000):
    return [
        ResultRow(
            experiment=ExperimentKind.DIVERSITY_FIT, scenario=Scenario.NO_DIRECT_LINK, scheme=Scheme.NOMA,
            user=1, rho_db=rho_db, b=3, K=2, N=2, trials=10 ** 8, failures=failures,
            p_hat=10 ** (-slope * rho_db / 10),
        )
        for rho_db in rho_dbs
    ]


class LoadConfigTest(ConfigDirMixin, TestCase):
    def test_defaults(self):
        config = load_config(self.write_config('experiment = outage-sweep\n'))
        self.assertEqual(config.params.scenario, Scenario.NO_DIRECT_LINK)
        self.assertEqual((config.params.N, config.params.K, config.params.b), (2, 2, 3))
        self.assertEqual(config.params.beta, 0.9)
        self.assertEqual(config.noma.alphas, (0.9, 0.1))
        self.assertEqual(config.noma.rates, (1.0, 1.0))
        self.assertEqual(config.values, DEFAULT_RHO_DB)
        self.assertEqual(config.rho_db, DEFAULT_FIXED_RHO_DB)
        self.assertEqual(config.trials, DEFAULT_OUTAGE_TRIALS)
        self.assertEqual(config.schemes, (Scheme.NOMA,))
        self.assertFalse(config.fast_path)

    def test_gain_ratio_defaults(self):
        config = load_config(self.write_config(GAIN_RATIO_CONFIG.replace('trials = 20000', '')))
        self.assertEqual(config.trials, DEFAULT_RATIO_TRIALS)
        self.assertEqual(config.sweep, SweepAxis.BITS)
        self.assertEqual(config.values, (1, 2, 3, math.inf))
        self.assertIsNone(config.point_params(math.inf).b)

    def test_file_values(self):
        config = load_config(self.write_config(
            "experiment = outage-sweep\n"
            "scenario = S-II\n"
            "N = 3\n"
            "K = 4\n"
            "b = continuous\n"
            "rates = 0.5\n"
            "schemes = noma, oma\n"
            "values = 0, 10, 20\n"
            "# comments are ignored\n"
            "fast_path = yes\n"
        ))
        self.assertEqual(config.params.scenario, Scenario.WITH_DIRECT_LINK)
        self.assertIsNone(config.params.b)
        self.assertEqual(config.noma.alphas, (0.7, 0.2, 0.1))
        self.assertEqual(config.noma.rates, (0.5, 0.5, 0.5))
        self.assertEqual(config.schemes, (Scheme.NOMA, Scheme.OMA))
        self.assertEqual(config.values, (0.0, 10.0, 20.0))
        self.assertTrue(config.fast_path)

    def test_overrides_win(self):
        config = self.load(OUTAGE_CONFIG, seed=99, trials=20_000, out='elsewhere.csv')
        self.assertEqual((config.seed, config.trials, config.out), (99, 20_000, 'elsewhere.csv'))

    def test_rejections(self):
        cases = [
            'experiment = outage-sweep\nbogus = 1\n',
            'scenario = I\n',
            'experiment = outage-sweep\nK =\n',
            'experiment = sideways\n',
            'experiment = outage-sweep\nscenario = III\n',
            'experiment = outage-sweep\ntrials = 100\n',
            'experiment = outage-sweep\nvalues = 10, 5\n',
            'experiment = outage-sweep\nN = three\n',
            'experiment = gain-ratio\nsweep = K\n',
            'experiment = diversity-fit\nsweep = b\nvalues = 1, 2\n',
        ]
        for text in cases:
            with self.subTest(text=text), self.assertRaises(ConfigError):
                load_config(self.write_config(text))

    def test_simulation_errors_pass_through(self):
        with self.assertRaises(SimulationError):
            load_config(self.write_config('experiment = outage-sweep\nN = 7\n'))
        with self.assertRaises(SimulationError):
            load_config(self.write_config('experiment = outage-sweep\nbeta = 1.5\n'))
        with self.assertRaises(SimulationError):
            load_config(self.write_config('experiment = outage-sweep\nalphas = 0.8, 0.1, 0.1\n'))

    def test_missing_file(self):
        with self.assertRaises(OSError):
            load_config(self.tmp / 'missing.env')


class RunTest(ConfigDirMixin, TestCase):
    def test_outage_sweep_rows(self):
        config = self.load(OUTAGE_CONFIG)
        summary = run(config)
        self.assertEqual(summary.rows_written, len(DEFAULT_RHO_DB) * 2)
        self.assertEqual([row.user for row in summary.rows[:4]], [1, 2, 1, 2])
        self.assertEqual([row.rho_db for row in summary.rows[::2]], list(DEFAULT_RHO_DB))
        for row in summary.rows:
            self.assertEqual(row.trials, 10_000)
            self.assertLessEqual(row.ci_low, row.p_hat)
            self.assertLessEqual(row.p_hat, row.ci_high)
            self.assertLessEqual(row.analytic_lower, row.analytic_upper)
            self.assertEqual(row.diversity, 2.0 * row.user)
        self.assertEqual(read_csv(config.out), summary.rows)

    def test_csv_layout(self):
        config = self.load(GAIN_RATIO_CONFIG)
        run(config)
        lines = Path(config.out).read_text(encoding='utf-8').splitlines()
        self.assertEqual(lines[0], ','.join(CSV_HEADER))
        self.assertEqual(len(lines), 5)
        last = dict(zip(CSV_HEADER, lines[-1].split(',')))
        self.assertEqual(last['b'], 'inf')
        self.assertEqual(last['p_hat'], '1.0')
        self.assertEqual(last['scheme'], '')
        self.assertEqual(last['rho_db'], '')

    def test_same_seed_same_bytes(self):
        first = self.load(OUTAGE_CONFIG, out=str(self.tmp / 'first.csv'))
        second = self.load(OUTAGE_CONFIG, out=str(self.tmp / 'second.csv'))
        run(first, workers=1)
        run(second, workers=3)
        self.assertEqual(Path(first.out).read_bytes(), Path(second.out).read_bytes())

    def test_gain_ratio_rows(self):
        summary = run(self.load(GAIN_RATIO_CONFIG))
        ratios = [row.p_hat for row in summary.rows]
        self.assertEqual(ratios, sorted(ratios))
        self.assertEqual(ratios[-1], 1.0)
        for row in summary.rows:
            self.assertEqual(row.analytic_upper, 1.0)
            self.assertLessEqual(row.analytic_lower, row.p_hat)

    def test_gain_ratio_direct_link_has_no_lower_bound(self):
        summary = run(self.load(GAIN_RATIO_CONFIG + 'scenario = II\n'))
        self.assertTrue(all(row.analytic_lower is None for row in summary.rows))

    def test_bounds_table_diversity(self):
        summary = run(self.load('experiment = bounds-table\nscenario = II\nschemes = NOMA, OMA, FDR\n'))
        noma = [row for row in summary.rows if row.scheme == Scheme.NOMA]
        oma = [row for row in summary.rows if row.scheme == Scheme.OMA]
        self.assertEqual({(row.user, row.diversity) for row in noma}, {(1, 3.0), (2, 6.0)})
        self.assertEqual({row.diversity for row in oma}, {3.0})
        self.assertFalse(any(row.scheme == Scheme.FDR for row in summary.rows))
        self.assertTrue(all(row.trials is None and row.p_hat is None for row in summary.rows))
        self.assertTrue(any(note.startswith('unsupported-parameters') for note in summary.notes))

    def test_unsupported_bounds_are_blank(self):
        summary = run(self.load(OUTAGE_CONFIG + 'm_G = 1\nm_g = 1\nvalues = 0, 10\n'))
        self.assertEqual(summary.rows_written, 4)
        self.assertTrue(all(row.analytic_upper is None and row.analytic_lower is None for row in summary.rows))
        self.assertEqual(len(summary.notes), 1)
        self.assertTrue(summary.notes[0].startswith('unsupported-parameters'))

    def test_elements_sweep(self):
        summary = run(self.load(OUTAGE_CONFIG + 'sweep = K\nvalues = 1, 2\nrho_db = 10\n'))
        self.assertEqual([row.K for row in summary.rows], [1, 1, 2, 2])
        self.assertEqual({row.rho_db for row in summary.rows}, {10.0})

    def test_fdr_rows_have_no_bounds(self):
        summary = run(self.load(OUTAGE_CONFIG + 'schemes = FDR\nvalues = 20\n'))
        self.assertEqual(len(summary.rows), 2)
        for row in summary.rows:
            self.assertEqual(row.scheme, Scheme.FDR)
            self.assertIsNone(row.analytic_upper)
            self.assertIsNone(row.diversity)

    def test_diversity_fit_without_enough_points(self):
        summary = run(self.load(OUTAGE_CONFIG.replace('outage-sweep', 'diversity-fit')))
        self.assertEqual(summary.fits, [])
        self.assertEqual(summary.rows_written, len(DEFAULT_RHO_DB) * 2)
        self.assertEqual(sum(note.startswith('insufficient-data') for note in summary.notes), 2)


class FitDiversityTest(TestCase):
    def test_exact_slopes(self):
        for slope in (2.0, 4.0):
            # keeps every p_hat inside the default fitting range
            rho_dbs = [20 / slope + 30 / slope * (i + 1) / 6 for i in range(5)]
            fit = fit_diversity(synthetic_rows(slope, rho_dbs))
            self.assertAlmostEqual(fit.slope, slope, delta=1e-9)
            self.assertAlmostEqual(fit.r_squared, 1.0, delta=1e-9)
            self.assertEqual(fit.points_used, 5)

    def test_window_selects_points(self):
        rows = synthetic_rows(2.0, [0.0, 5.0, 10.0, 15.0, 20.0, 25.0])
        fit = fit_diversity(rows, window=(10.0, 25.0))
        self.assertEqual(fit.points_used, 4)
        self.assertEqual(fit.window, (10.0, 25.0))

    def test_low_failure_points_dropped(self):
        rows = synthetic_rows(2.0, [12.0, 14.0, 16.0], failures=5)
        with self.assertRaises(InsufficientData):
            fit_diversity(rows)

    def test_too_few_points(self):
        with self.assertRaises(InsufficientData):
            fit_diversity(synthetic_rows(2.0, [12.0, 14.0]))


class CommandTest(ConfigDirMixin, TestCase):
    def call(self, *args):
        out = StringIO()
        call_command('sim', *args, stdout=out)
        return out.getvalue()

    def test_run_and_record(self):
        csv_path = self.tmp / 'nested' / 'run.csv'
        output = self.call(str(self.write_config(GAIN_RATIO_CONFIG)), '--out', str(csv_path), '--seed', '3')
        self.assertIn('Wrote 4 rows', output)
        self.assertTrue(csv_path.exists())
        experiment_run = ExperimentRun.objects.get()
        self.assertEqual(experiment_run.kind, ExperimentKind.GAIN_RATIO)
        self.assertEqual(experiment_run.seed, 3)
        self.assertEqual(experiment_run.results.count(), 4)
        continuous = experiment_run.results.get(position=3)
        self.assertIsNone(continuous.b)
        self.assertEqual(continuous.values()[CSV_HEADER.index('b')], 'inf')

    def test_no_record(self):
        self.call(str(self.write_config(GAIN_RATIO_CONFIG)), '--out', str(self.tmp / 'run.csv'), '--no-record')
        self.assertFalse(ExperimentRun.objects.exists())

    def test_config_error_exit_code(self):
        with self.assertRaises(CommandError) as ctx:
            self.call(str(self.write_config('experiment = outage-sweep\nbogus = 1\n')))
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertTrue(str(ctx.exception).startswith('config-error'))

    def test_missing_file_exit_code(self):
        with self.assertRaises(CommandError) as ctx:
            self.call(str(self.tmp / 'missing.env'))
        self.assertEqual(ctx.exception.returncode, 3)


class RecordAndExportTest(ConfigDirMixin, TestCase):
    def setUp(self):
        super().setUp()
        self.summary = run(self.load(OUTAGE_CONFIG + 'values = 0, 10\n'))
        self.experiment_run = record_run(self.summary)

    def test_record_run(self):
        self.assertEqual(self.experiment_run.rows_written, 4)
        self.assertEqual(self.experiment_run.scenario, Scenario.NO_DIRECT_LINK)
        stored = [result.values() for result in SweepResult.objects.filter(run=self.experiment_run)]
        self.assertEqual(len(stored), 4)
        self.assertEqual(stored[0][CSV_HEADER.index('p_hat')], self.summary.rows[0].p_hat)
        self.assertEqual(stored[0][CSV_HEADER.index('b')], 3)

    def test_export_command(self):
        path = self.tmp / 'runs.xlsx'
        call_command('export_runs', '--out', str(path), stdout=StringIO())
        wb = load_workbook(path)
        self.assertEqual(wb.sheetnames, ['Runs', '1 outage-sweep'])
        sheet = wb['1 outage-sweep']
        self.assertEqual(tuple(cell.value for cell in sheet[1]), CSV_HEADER)
        self.assertEqual(sheet.max_row, 5)

    def test_export_filter_without_matches(self):
        out = StringIO()
        call_command('export_runs', '--out', str(self.tmp / 'none.xlsx'), '--kind', 'gain-ratio', stdout=out)
        self.assertIn('No runs to export', out.getvalue())

    def test_admin_export_action(self):
        admin_user = User.objects.create_superuser(username='admin', password='adminpass')
        self.client.force_login(admin_user)
        response = self.client.post(reverse('admin:irsnoma_experimentrun_changelist'), {
            'action': 'export_xlsx',
            '_selected_action': [str(self.experiment_run.pk)],
        })
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response['Content-Type'], XLSX_CONTENT_TYPE)


class ShippedConfigsTest(TestCase):
    def setUp(self):
        self.configs = {path.name: load_config(path) for path in sorted(CONFIGS_DIR.glob('*.env'))}

    def test_all_configs_load(self):
        self.assertGreaterEqual(len(self.configs), 20)
        for name, config in self.configs.items():
            self.assertTrue(config.out.startswith('results/'), msg=name)

    def test_outage_versus_elements_grid(self):
        swept = [
            config for config in self.configs.values()
            if config.kind == ExperimentKind.OUTAGE_SWEEP and config.sweep == SweepAxis.ELEMENTS
        ]
        for config in swept:
            self.assertEqual(config.values, (1, 2, 3, 4, 5))
            self.assertEqual(config.params.N, 3)
        covered = {(config.params.scenario, config.params.b, config.rho_db) for config in swept}
        expected = {
            (scenario, b, rho_db)
            for scenario in (Scenario.NO_DIRECT_LINK, Scenario.WITH_DIRECT_LINK)
            for b in (2, 3, 4, None)
            for rho_db in (3, 6)
        }
        self.assertEqual(covered, expected)

    def test_diversity_fits_cover_user_and_element_mixes(self):
        fits = [config for config in self.configs.values() if config.kind == ExperimentKind.DIVERSITY_FIT]
        covered = {(config.params.scenario, config.params.N, config.params.K) for config in fits}
        for scenario in (Scenario.NO_DIRECT_LINK, Scenario.WITH_DIRECT_LINK):
            for N, K in ((2, 2), (4, 2), (3, 3), (2, 4)):
                self.assertIn((scenario, N, K), covered)

    def test_direct_link_fit_grid_stays_in_measurable_range(self):
        config = self.configs['diversity_fit_with_direct_link.env']
        self.assertEqual(config.params.scenario, Scenario.WITH_DIRECT_LINK)
        self.assertLessEqual(max(config.values), 15)
        self.assertGreaterEqual(len(config.values), 5)


@tag('slow')
class AcceptanceTest(ConfigDirMixin, TestCase):
    def fitted_slopes(self, config_name):
        summary = run(load_config(CONFIGS_DIR / config_name, out=str(self.tmp / 'fit.csv')))
        fit_rows = [row for row in summary.rows if row.rho_db is None]
        self.assertEqual([row.diversity for row in fit_rows], [fit.slope for _, _, fit in summary.fits])
        return {n: fit for _, n, fit in summary.fits}

    def test_no_direct_link_diversity_slope(self):
        fits = self.fitted_slopes('diversity_fit_no_direct_link.env')
        self.assertIn(1, fits)
        self.assertGreaterEqual(fits[1].points_used, 3)
        self.assertTrue(1.6 <= fits[1].slope <= 2.4, msg=fits)

    def test_with_direct_link_diversity_slope(self):
        fits = self.fitted_slopes('diversity_fit_with_direct_link.env')
        self.assertIn(1, fits)
        self.assertGreaterEqual(fits[1].points_used, 3)
        self.assertTrue(2.4 <= fits[1].slope <= 3.6, msg=fits)

    def test_three_bits_close_to_continuous(self):
        for scenario in ('I', 'II'):
            config = self.load(f'experiment = gain-ratio\nscenario = {scenario}\nsweep = b\nvalues = 3\ntrials = 1000000\n')
            self.assertGreaterEqual(run(config).rows[0].p_hat, 0.95)
