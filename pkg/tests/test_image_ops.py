import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from PIL import Image

from unreflect.image import (
    DimensionError,
    Gradients,
    gradient,
    gradient_adjoint,
    laplacian,
    laplacian_adjoint,
    load_image,
    save_image,
)

from oracles import gradient_matrices, laplacian_matrix, naive_gradient, naive_laplacian


def inner(a, b):
    return float(np.sum(np.asarray(a) * np.asarray(b)))


class TestGradient:
    def test_constant_image_has_zero_gradient(self):
        img = np.full((5, 7), 0.5)
        g = gradient(img)
        assert np.all(g.dx == 0.0)
        assert np.all(g.dy == 0.0)

    def test_two_by_two_hand_case(self):
        img = np.array([[0.0, 1.0], [0.0, 1.0]])
        g = gradient(img)
        np.testing.assert_array_equal(g.dx, [[1.0, 0.0], [1.0, 0.0]])
        np.testing.assert_array_equal(g.dy, [[0.0, 0.0], [0.0, 0.0]])

    def test_single_row_image_rejected(self):
        with pytest.raises(DimensionError):
            gradient(np.zeros((1, 5)))
        with pytest.raises(DimensionError):
            gradient(np.zeros((5, 1)))

    def test_matches_naive_definition(self, rng):
        img = rng.random((6, 9))
        g = gradient(img)
        dx, dy = naive_gradient(img)
        np.testing.assert_array_equal(g.dx, dx)
        np.testing.assert_array_equal(g.dy, dy)

    def test_channels_treated_independently(self, rng):
        img = rng.random((5, 6, 3))
        g = gradient(img)
        for c in range(3):
            gc = gradient(img[:, :, c])
            np.testing.assert_array_equal(g.dx[:, :, c], gc.dx)
            np.testing.assert_array_equal(g.dy[:, :, c], gc.dy)

    @given(a=st.floats(-3, 3), b=st.floats(-3, 3))
    @settings(max_examples=25, deadline=None)
    def test_linearity(self, a, b):
        rng = np.random.default_rng(7)
        x = rng.random((4, 5))
        y = rng.random((4, 5))
        g = gradient(a * x + b * y)
        gx = gradient(x)
        gy = gradient(y)
        np.testing.assert_allclose(g.dx, a * gx.dx + b * gy.dx, atol=1e-12)
        np.testing.assert_allclose(g.dy, a * gx.dy + b * gy.dy, atol=1e-12)


class TestLaplacian:
    def test_constant_annihilated(self):
        assert np.all(laplacian(np.full((4, 4), 0.3)) == 0.0)

    def test_linear_ramp_interior_zero(self):
        w = 8
        img = np.tile(np.arange(w) / (w - 1), (6, 1))
        lap = laplacian(img)
        np.testing.assert_allclose(lap[1:-1, 1:-1], 0.0, atol=1e-15)

    def test_center_impulse(self):
        img = np.zeros((3, 3))
        img[1, 1] = 1.0
        lap = laplacian(img)
        assert lap[1, 1] == -4.0
        assert lap[0, 1] == 1.0 and lap[2, 1] == 1.0
        assert lap[1, 0] == 1.0 and lap[1, 2] == 1.0

    def test_matches_naive_definition(self, rng):
        img = rng.random((7, 5))
        np.testing.assert_array_equal(laplacian(img), naive_laplacian(img))

    def test_translation_invariance(self, rng):
        img = rng.random((6, 6))
        np.testing.assert_allclose(
            laplacian(img + 17.3), laplacian(img), atol=1e-12
        )

    def test_too_small_rejected(self):
        with pytest.raises(DimensionError):
            laplacian(np.zeros((1, 4)))


class TestGradientAdjoint:
    def test_zero_field_maps_to_zero(self):
        z = np.zeros((4, 4))
        np.testing.assert_array_equal(gradient_adjoint(Gradients(z, z)), z)

    def test_adjoint_identity(self, rng):
        for _ in range(10):
            a = rng.random((4, 4))
            bx = rng.random((4, 4))
            by = rng.random((4, 4))
            g = gradient(a)
            lhs = inner(g.dx, bx) + inner(g.dy, by)
            rhs = inner(a, gradient_adjoint(Gradients(bx, by)))
            assert abs(lhs - rhs) < 1e-12

    def test_delta_field_gives_matrix_column(self):
        # adjoint columns are rows of the explicit forward-difference matrix
        h = w = 4
        gx_mat, _ = gradient_matrices(h, w)
        k = 1 * w + 2
        bx = np.zeros((h, w))
        bx[1, 2] = 1.0
        out = gradient_adjoint(Gradients(bx, np.zeros((h, w))))
        np.testing.assert_allclose(out.ravel(), gx_mat.T[:, k], atol=1e-15)
        # the pattern is a signed backward difference
        assert out[1, 2] == -1.0 and out[1, 3] == 1.0

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(DimensionError):
            gradient_adjoint(Gradients(np.zeros((4, 4)), np.zeros((4, 5))))

    def test_exact_transpose_of_explicit_matrix(self, rng):
        h, w = 3, 5
        gx_mat, gy_mat = gradient_matrices(h, w)
        bx = rng.random((h, w))
        by = rng.random((h, w))
        expected = (gx_mat.T @ bx.ravel() + gy_mat.T @ by.ravel()).reshape(h, w)
        np.testing.assert_allclose(
            gradient_adjoint(Gradients(bx, by)), expected, atol=1e-12
        )


class TestLaplacianAdjoint:
    def test_zero_field_maps_to_zero(self):
        z = np.zeros((5, 5))
        np.testing.assert_array_equal(laplacian_adjoint(z), z)

    def test_adjoint_identity(self, rng):
        for _ in range(10):
            a = rng.random((5, 5))
            b = rng.random((5, 5))
            lhs = inner(laplacian(a), b)
            rhs = inner(a, laplacian_adjoint(b))
            assert abs(lhs - rhs) < 1e-12

    def test_equals_explicit_matrix_transpose(self, rng):
        h = w = 5
        mat = laplacian_matrix(h, w)
        b = rng.random((h, w))
        expected = (mat.T @ b.ravel()).reshape(h, w)
        np.testing.assert_allclose(laplacian_adjoint(b), expected, atol=1e-12)

    def test_interior_matches_laplacian(self, rng):
        b = rng.random((6, 6))
        np.testing.assert_allclose(
            laplacian_adjoint(b)[1:-1, 1:-1], laplacian(b)[1:-1, 1:-1], atol=1e-12
        )

    def test_stencil_matrix_is_symmetric(self):
        # replicate boundaries make the stencil self-adjoint everywhere
        mat = laplacian_matrix(5, 5)
        np.testing.assert_array_equal(mat, mat.T)


class TestOperatorConsistency:
    def test_laplacian_equals_minus_grad_adjoint_grad(self, rng):
        # with zero-padded forward differences and their exact transpose,
        # the composition reproduces the replicate-boundary stencil at every
        # pixel, boundaries included; the stencil stays the normative form
        a = rng.random((7, 9))
        composed = -gradient_adjoint(gradient(a))
        np.testing.assert_allclose(composed, laplacian(a), atol=1e-12)


class TestImageIO:
    def test_endpoint_and_midpoint_mapping(self, tmp_path):
        arr = np.array([[255, 128], [0, 64]], dtype=np.uint8)
        p = tmp_path / "g.png"
        Image.fromarray(arr, mode="L").save(p)
        img = load_image(p)
        assert img[0, 0] == 1.0
        assert img[0, 1] == 128 / 255
        assert img[1, 0] == 0.0

    def test_save_load_roundtrip_byte_identical(self, tmp_path, rng):
        arr = rng.integers(0, 256, size=(9, 11, 3), dtype=np.uint8)
        p1 = tmp_path / "a.png"
        p2 = tmp_path / "b.png"
        Image.fromarray(arr, mode="RGB").save(p1)
        save_image(load_image(p1), p2)
        assert np.array_equal(np.asarray(Image.open(p1)), np.asarray(Image.open(p2)))

    def test_sixteen_bit_png(self, tmp_path):
        arr = np.array([[65535, 0], [32768, 1]], dtype=np.uint16)
        p = tmp_path / "g16.png"
        Image.fromarray(arr).save(p)
        img = load_image(p)
        assert img[0, 0] == 1.0
        assert img[1, 0] == 32768 / 65535

    def test_alpha_stripped_with_warning(self, tmp_path, rng):
        arr = rng.integers(0, 256, size=(4, 4, 4), dtype=np.uint8)
        p = tmp_path / "rgba.png"
        Image.fromarray(arr, mode="RGBA").save(p)
        with pytest.warns(UserWarning, match="alpha"):
            img = load_image(p)
        assert img.shape == (4, 4, 3)

    def test_unreadable_file_raises_oserror(self, tmp_path):
        p = tmp_path / "junk.png"
        p.write_bytes(b"not a png at all")
        with pytest.raises(OSError):
            load_image(p)
        with pytest.raises(OSError):
            load_image(tmp_path / "missing.png")

    def test_save_clamps_out_of_range(self, tmp_path):
        img = np.array([[1.5, -0.25], [0.5, 1.0]])
        p = tmp_path / "c.png"
        save_image(img, p)
        back = np.asarray(Image.open(p))
        assert back[0, 0] == 255 and back[0, 1] == 0

    def test_palette_png_converted_to_rgb(self, tmp_path, rng):
        arr = rng.integers(0, 256, size=(6, 6, 3), dtype=np.uint8)
        p = tmp_path / "pal.png"
        Image.fromarray(arr, mode="RGB").quantize(colors=8).save(p)
        img = load_image(p)
        assert img.shape == (6, 6, 3)
        assert img.min() >= 0.0 and img.max() <= 1.0

    def test_jpeg_round_trip_is_read_only(self, tmp_path, rng):
        arr = rng.integers(0, 256, size=(8, 8, 3), dtype=np.uint8)
        jp = tmp_path / "a.jpg"
        Image.fromarray(arr, mode="RGB").save(jp, quality=95)
        img = load_image(jp)
        assert img.shape == (8, 8, 3)
        with pytest.raises(OSError):
            save_image(img, tmp_path / "out.jpg")
