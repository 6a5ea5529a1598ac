"""Test the smooshlab console entrypoint."""

import json

import pytest

from console.interface import EXIT_FAILED, EXIT_OK, EXIT_USAGE, main


class TestConstantsCommand:
    """Test the constants subcommand"""

    def test_prints_report(self, capsys):
        """Test the JSON report for the default parameters"""
        assert main(['constants']) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert 1.82e-7 <= report['frak_p'] <= 1.94e-7
        assert report['m'] == 52

    def test_domain_error(self, capsys):
        """Test p outside (0, 1) is a usage error"""
        assert main(['constants', '--p', '1.0']) == EXIT_USAGE


class TestExperimentCommands:
    """Test simulate, couple and mixing-curve"""

    def test_print_config(self, capsys, isolated_env):
        """Test the resolved config is printed without running"""
        assert main(['simulate', '--preset', 'lattice', '--set', 'N=12', '--print-config']) == EXIT_OK
        out = capsys.readouterr().out
        assert 'model = lattice1d' in out
        assert 'N = 12' in out
        assert 'dt = 0.001' in out
        assert not (isolated_env / 'runs').exists()

    def test_simulate(self, isolated_env):
        """Test a small lattice run writes a manifest under --out"""
        out = isolated_env / 'out'
        code = main(['simulate', '--preset', 'lattice', '--replicas', '12', '--seed', '5',
                     '--set', 'outputs=hitting,summary', '--out', str(out), '--workers', '1'])
        assert code == EXIT_OK
        manifests = list(out.glob('simulate-lattice1d-*/manifest.json'))
        assert len(manifests) == 1
        manifest = json.loads(manifests[0].read_text(encoding='utf-8'))
        assert manifest['seed'] == 5 and manifest['replicas'] == 12

    def test_couple(self, isolated_env):
        """Test the couple subcommand"""
        code = main(['couple', '--preset', 'lattice', '--replicas', '8', '--workers', '1'])
        assert code == EXIT_OK
        assert list((isolated_env / 'runs').glob('couple-lattice1d-*/coupling.csv'))

    def test_invalid_override(self, isolated_env):
        """Test an out-of-domain override"""
        assert main(['simulate', '--set', 'p=1.5']) == EXIT_USAGE

    def test_malformed_override(self, isolated_env):
        """Test an override without '='"""
        assert main(['simulate', '--set', 'p']) == EXIT_USAGE

    def test_missing_config_file(self, isolated_env):
        """Test an unreadable config file"""
        assert main(['simulate', '--config', str(isolated_env / 'absent.cfg')]) == EXIT_USAGE

    def test_mixing_curve_too_few_replicas(self, isolated_env):
        """Test mixing-curve refuses an undersampled run"""
        assert main(['mixing-curve', '--preset', 'lattice', '--replicas', '10']) == EXIT_USAGE

    def test_unknown_preset(self):
        """Test argparse rejects an unknown preset"""
        with pytest.raises(SystemExit) as info:
            main(['simulate', '--preset', 'riffle'])
        assert info.value.code == 2


class TestVerifyCommand:
    """Test the verify subcommand"""

    def test_single_criterion(self, isolated_env):
        """Test one quick criterion and its report files"""
        out = isolated_env / 'reports'
        assert main(['verify', '--only', 'lens-integral', '--out', str(out)]) == EXIT_OK
        report_dir = out / 'verify-full-20240601'
        assert (report_dir / 'verify_report.csv').exists()
        report = json.loads((report_dir / 'verify_report.json').read_text(encoding='utf-8'))
        assert [r['criterion'] for r in report['rows']] == ['lens-integral']
        assert report['failed'] == []

    def test_failed_criterion(self, isolated_env, monkeypatch):
        """Test a failing criterion gives exit status 1"""
        from smoosh.analysis import constants
        monkeypatch.setattr(constants, 'frak_p', lambda *args: 1.0)
        assert main(['verify', '--only', 'capture-constant']) == EXIT_FAILED
