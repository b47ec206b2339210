import numpy as np
import pytest

from portnet.features import (
    FeatureError,
    RawTable,
    UnknownLevelError,
    clean,
    decode_cell,
    encode,
    impute,
    profile,
    raw_table_from_ports,
    read_feature_table,
    write_feature_table,
)
from portnet.ingest import PortRecord


def table(columns, rows, ids=None):
    ids = ids if ids is not None else list(range(1, len(rows) + 1))
    return RawTable(port_ids=ids, columns=columns, cells=rows)


class TestProfile:
    def test_missing_support_cardinality(self):
        # 66% missing, support 34, 2 levels: shaped like a fax-availability column
        n = 100
        col = [None] * 66 + ["Y"] * 20 + ["N"] * 14
        t = table(["fax"], [[v] for v in col])
        spec = profile(t)["fax"]
        assert spec.missing_frac == pytest.approx(0.66)
        assert spec.support == 34
        assert spec.cardinality == 2
        assert spec.kind == "categorical"

    def test_fully_observed_column(self):
        t = table(["x"], [["A"], ["B"], ["A"]])
        spec = profile(t)["x"]
        assert spec.missing_frac == 0.0
        assert spec.support == 3

    def test_planted_cardinality(self):
        levels = [f"L{i}" for i in range(7)]
        t = table(["c"], [[lvl] for lvl in levels * 3])
        assert profile(t)["c"].cardinality == 7

    def test_latitude_longitude_continuous(self):
        t = table(["LATITUDE", "LONGITUDE", "size"],
                  [["1.5", "2.5", "L"], ["3.5", "4.5", "M"]])
        specs = profile(t)
        assert specs["LATITUDE"].kind == "continuous"
        assert specs["LONGITUDE"].kind == "continuous"
        assert specs["size"].kind == "categorical"


class TestClean:
    def _table(self):
        rows = []
        for i in range(100):
            rows.append([
                "meta" + str(i),             # blocklisted meta column
                "Y" if i < 34 else None,      # 66% missing -> dropped
                "A" if i % 2 else "B",        # fully observed -> kept
                "Q" if i < 49 else None,      # 51% missing -> dropped at 0.5
            ])
        return table(["region_ref", "fax", "shelter", "late"], rows)

    def test_threshold_and_blocklist(self):
        t = self._table()
        specs = profile(t)
        cleaned = clean(t, specs, blocklist={"region_ref"}, threshold=0.5)
        assert cleaned.columns == ["shelter"]

    def test_boundary_column_retained_at_threshold(self):
        # 29.6%-missing column survives a 0.5 threshold
        rows = [["Y"] if i >= 296 else [None] for i in range(1000)]
        t = table(["radio"], rows)
        cleaned = clean(t, profile(t), threshold=0.5)
        assert cleaned.columns == ["radio"]

    def test_vacuous_threshold_only_blocklist_drops(self):
        t = self._table()
        cleaned = clean(t, profile(t), blocklist={"region_ref"}, threshold=1.0)
        assert cleaned.columns == ["fax", "shelter", "late"]

    def test_monotone_in_threshold(self):
        t = self._table()
        specs = profile(t)
        kept = [set(clean(t, specs, threshold=th).columns)
                for th in (0.3, 0.5, 0.7, 1.0)]
        for small, big in zip(kept, kept[1:]):
            assert small <= big

    def test_nothing_retained_is_error(self):
        t = table(["only"], [[None]] * 4)
        with pytest.raises(FeatureError):
            clean(t, profile(t), threshold=0.5)


class TestEncode:
    def test_letter_depth_codes(self):
        # 16 observed letter levels, deepest letter takes the top code
        letters = [c for c in "ABCDEFGHJKLMNOPQ"]  # 16 levels, no I
        t = table(["depth"], [[l] for l in letters])
        ft = encode(t, profile(t))
        assert ft.level_maps["depth"]["A"] == 0
        assert ft.level_maps["depth"]["Q"] == 15
        assert ft.values[:, 0].max() == 15.0

    def test_binary_yn(self):
        t = table(["flag"], [["Y"], ["N"], ["Y"]])
        ft = encode(t, profile(t))
        assert ft.level_maps["flag"] == {"N": 0, "Y": 1}
        assert ft.values[:, 0].tolist() == [1.0, 0.0, 1.0]

    def test_decode_round_trip(self):
        t = table(["flag", "LATITUDE", "LONGITUDE"],
                  [["Y", "1.25", "3.5"], ["N", "-2.5", "4.5"], [None, "0.5", "5.5"]])
        ft = encode(t, profile(t))
        assert decode_cell(ft, "flag", ft.values[0, 0]) == "Y"
        assert decode_cell(ft, "flag", ft.values[1, 0]) == "N"
        assert float(decode_cell(ft, "LATITUDE", ft.values[0, 1])) == 1.25
        assert np.isnan(ft.values[2, 0]) and not ft.observed[2, 0]

    def test_unseen_level_is_error(self):
        t = table(["flag"], [["Y"], ["N"]])
        specs = profile(t)
        t2 = table(["flag"], [["MAYBE"]])
        with pytest.raises(UnknownLevelError) as exc:
            encode(t2, specs)
        assert exc.value.column == "flag"
        assert exc.value.level == "MAYBE"

    def test_from_ports_carries_coordinates(self):
        ports = [
            PortRecord(1, "A", "AA", 10.0, 20.0, "L", {"flag": "Y"}),
            PortRecord(2, "B", "BB", -5.0, 30.0, "M", {"flag": "N"}),
        ]
        t = raw_table_from_ports(ports)
        assert t.columns == ["flag", "LATITUDE", "LONGITUDE"]
        ft = encode(t, profile(t))
        assert ft.values[0].tolist() == [1.0, 10.0, 20.0]


class TestImpute:
    def test_no_missing_is_identity(self):
        rng = np.random.default_rng(0)
        t = table(["LATITUDE", "LONGITUDE"],
                  [[repr(float(a)), repr(float(b))]
                   for a, b in rng.normal(size=(30, 2))])
        ft = encode(t, profile(t))
        out = impute(ft, cycles=10)
        assert (out.values == ft.values).all()

    def test_planted_linear_dependence_recovered(self):
        rng = np.random.default_rng(5)
        n = 200
        c1 = rng.normal(size=n)
        c2 = rng.normal(size=n)
        c3 = 2.0 * c1 - c2
        mask = rng.random(n) < 0.2
        rows = []
        for i in range(n):
            rows.append([repr(float(c1[i])), repr(float(c2[i])),
                         None if mask[i] else repr(float(c3[i]))])
        t = table(["LATITUDE", "LONGITUDE", "combo"], rows)
        specs = profile(t)
        specs["combo"].kind = "continuous"  # planted numeric column
        ft = encode(t, specs)
        out = impute(ft, cycles=10)
        assert np.abs(out.values[mask, 2] - c3[mask]).max() < 1e-6
        # observed cells bit-identical
        assert (out.values[~mask, 2] == ft.values[~mask, 2]).all()
        assert (out.values[:, :2] == ft.values[:, :2]).all()

    def test_single_missing_cell_matches_hand_ols(self):
        # col2 = col1 exactly; one missing cell in col2
        c1 = np.array([1.0, 2.0, 3.0, 4.0])
        rows = [[repr(float(v)), repr(float(v))] for v in c1]
        rows[2][1] = None
        t = table(["LATITUDE", "LONGITUDE"], rows)
        ft = encode(t, profile(t))
        out = impute(ft, cycles=10, ridge=0.0)
        # hand OLS on observed pairs (1,1),(2,2),(4,4): slope 1, intercept 0
        assert out.values[2, 1] == pytest.approx(3.0, abs=1e-9)

    def test_all_missing_column_is_error(self):
        t = table(["a", "LATITUDE"], [[None, "1.0"], [None, "2.0"]])
        ft = encode(t, profile(t))
        with pytest.raises(FeatureError):
            impute(ft)

    def test_deterministic(self):
        rng = np.random.default_rng(9)
        rows = []
        for i in range(50):
            rows.append([
                None if rng.random() < 0.3 else ("Y" if rng.random() < 0.5 else "N"),
                repr(float(rng.normal())),
                repr(float(rng.normal())),
            ])
        t = table(["flag", "LATITUDE", "LONGITUDE"], rows)
        ft = encode(t, profile(t))
        a = impute(ft, cycles=10, seed=1)
        b = impute(ft, cycles=10, seed=2)
        assert (a.values == b.values).all()  # seed is inert for OLS


class TestFeatureTableIo:
    def test_bit_exact_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        rows = []
        for i in range(25):
            rows.append([
                None if rng.random() < 0.2 else rng.choice(["A", "B", "C"]),
                repr(float(rng.normal()) * 90),
                repr(float(rng.normal()) * 180),
            ])
        t = table(["kind", "LATITUDE", "LONGITUDE"], rows)
        ft = impute(encode(t, profile(t)))
        csv_path = tmp_path / "features.csv"
        man_path = tmp_path / "features_manifest.cfg"
        write_feature_table(ft, csv_path, man_path, threshold=0.5, cycles=10, seed=0)
        again = read_feature_table(csv_path, man_path)
        assert (again.values == ft.values).all()
        assert (again.observed == ft.observed).all()
        assert again.columns == ft.columns
        assert again.level_maps == ft.level_maps
        assert (again.port_ids == ft.port_ids).all()
