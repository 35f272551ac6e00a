# Copyright 2026 The srstereo Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


import numpy as np
import pytest

import srstereo as s


def test_scalar_functions():
    assert s.clip_symmetric(5.0, 3.0) == 3.0
    assert s.balanced_weight(4.0, 0.5) == 0.5
    assert s.cb_l1(4.0, 0.5) == 2.0
    assert s.cb_smooth_l1(4.0, 0.5) == 1.75


def test_scene_shapes_and_metrics():
    sc = s.generate_scene(seed=3, height=32, width=48, d_max=12.0)
    assert sc["left"].shape == (3, 32, 48)
    assert sc["disparity"].shape == (32, 48)
    assert sc["occlusion"].dtype == np.bool_
    d = sc["disparity"]
    assert s.epe(d, d) == 0.0
    assert s.epe(d + 1.0, d) == pytest.approx(1.0)
    assert s.err_rate(d + 2.0, d, 1.0) == 1.0
    edges = s.edge_gt(d)
    assert s.edge_f1(edges, edges > 0.5) in (1.0, None)


def test_pseudo_labels():
    edge = np.linspace(0.0, 1.0, 12).reshape(3, 4)
    values, valid = s.pseudo_label_select(edge, 0.5)
    assert valid.sum() == (edge < 0.5).sum()
    with pytest.raises(ValueError):
        s.pseudo_label_select(edge, 0.0)


def test_pfm_roundtrip(tmp_path):
    a = np.arange(12, dtype=np.float32).reshape(3, 4).astype(np.float64)
    path = str(tmp_path / "a.pfm")
    s.write_pfm(path, a)
    assert np.array_equal(s.read_pfm(path), a)
    with pytest.raises(IOError):
        s.read_pfm(str(tmp_path / "missing.pfm"))


def test_model_predict_train_and_checkpoint(tmp_path):
    m = s.StereoModel(num_sru=2, seed=4)
    sc = s.generate_scene(seed=1, height=32, width=48, d_max=12.0)
    d = m.predict(sc["left"], sc["right"], d_max=12.0)
    assert d.shape == (32, 48)
    losses = m.train(scene_seed=2, scenes=2, steps=2)
    assert len(losses) == 2 and all(np.isfinite(losses))
    path = str(tmp_path / "m.ckpt")
    m.save(path)
    other = s.StereoModel(num_sru=2, seed=9)
    other.load(path)
    assert np.array_equal(other.predict(sc["left"], sc["right"], d_max=12.0),
                          m.predict(sc["left"], sc["right"], d_max=12.0))


def test_gradcheck_binding():
    ok, worst = s.gradcheck("cb_l1", 2)
    assert ok and worst < 1e-4
    assert "stepwise_update" in s.gradcheck_ops()
