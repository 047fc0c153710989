import numpy as np
import pytest
import torch

from dl_regressor.model import ModelSpec, build_model, parameter_count


class TestSpecValidation:
    def test_bad_input_px(self):
        with pytest.raises(ValueError):
            ModelSpec(input_px=33, n_stages=5)

    def test_bad_dropout(self):
        with pytest.raises(ValueError):
            ModelSpec(dropout_p=1.0)

    def test_bad_stage_count(self):
        with pytest.raises(ValueError):
            ModelSpec(n_stages=6)

    def test_default_dropout_stages_are_last_two(self):
        assert ModelSpec().dropout_stages == (3, 4)
        assert ModelSpec(input_px=8, n_stages=2).dropout_stages == (0, 1)


class TestForward:
    def test_one_scalar_per_input(self):
        model = build_model(ModelSpec(input_px=32, base_channels=4, n_stages=3))
        model.eval()
        for b in (1, 5):
            out = model(torch.randn(b, 2, 32, 32))
            assert out.shape == (b,)
            assert torch.isfinite(out).all()

    def test_deterministic_without_dropout(self):
        model = build_model(ModelSpec(input_px=32, base_channels=4, n_stages=3))
        model.eval()
        x = torch.zeros(1, 2, 32, 32)
        with torch.no_grad():
            assert torch.equal(model(x), model(x))

    def test_shape_mismatch_raises(self):
        model = build_model(ModelSpec(input_px=32, base_channels=4, n_stages=3))
        with pytest.raises(ValueError):
            model(torch.zeros(1, 2, 16, 16))
        with pytest.raises(ValueError):
            model(torch.zeros(1, 3, 32, 32))

    def test_multiresolution_taps_widen_stages(self):
        spec = ModelSpec(input_px=32, base_channels=4, n_stages=3)
        model = build_model(spec)
        # stage 1's first convolution sees stage 0's output plus the
        # 2-channel input tap
        first_conv = model.stages[1][0]
        assert first_conv.in_channels == 4 + 2
        assert parameter_count(model) > 0


class TestGradient:
    def test_finite_difference_oracle(self):
        """Analytic input gradients vs central differences on a toy-size
        variant, in double precision."""
        torch.manual_seed(11)
        model = build_model(ModelSpec(input_px=8, base_channels=3, n_stages=2,
                                      dropout_p=0.0)).double()
        model.eval()
        x = torch.randn(1, 2, 8, 8, dtype=torch.float64, requires_grad=True)
        out = model(x)
        out.backward()
        grad = x.grad.detach().clone()

        eps = 1e-6
        fd = torch.zeros_like(grad)
        with torch.no_grad():
            flat = x.detach().reshape(-1)
            for i in range(flat.numel()):
                orig = flat[i].item()
                flat[i] = orig + eps
                up = model(flat.reshape(1, 2, 8, 8)).item()
                flat[i] = orig - eps
                down = model(flat.reshape(1, 2, 8, 8)).item()
                flat[i] = orig
                fd.reshape(-1)[i] = (up - down) / (2 * eps)
        scale = torch.maximum(grad.abs(), torch.tensor(1e-6, dtype=torch.float64))
        assert ((grad - fd).abs() / scale).max() <= 1e-2
