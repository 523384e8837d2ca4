"""Tests for the batch classifier."""

from pytest_mock import MockerFixture

from tvgroups.models.classification import GroupKind
from tvgroups.services.batch import BatchClassifier, ClassificationJob, classify_job
from tvgroups.services.constructions import cyclic_shift_mealy, lamplighter_mealy, sausage_mealy


class TestClassifyJob:
    """The unit of work shipped to worker processes."""

    def test_row_carries_index_and_verdict(self):
        job = ClassificationJob(
            index=7, automaton=sausage_mealy(2), max_exp=12, bound=2, max_closure=100_000
        )
        row = classify_job(job)
        assert row.index == 7
        assert row.abelian
        assert row.verdict == GroupKind.FREE_ABELIAN
        assert row.rank == 1
        assert row.bound == 2


class TestBatchClassifier:
    """Serial and pooled execution."""

    def test_serial_run(self):
        classifier = BatchClassifier(max_exp=12, bound=2)
        rows = classifier.run([cyclic_shift_mealy(2), lamplighter_mealy()])
        assert [row.index for row in rows] == [0, 1]
        assert rows[0].signature == "ElementaryAbelian(2)"
        assert rows[1].verdict == GroupKind.NON_ABELIAN
        assert not rows[1].abelian

    def test_pool_results_are_sorted(self, mocker: MockerFixture):
        """Rows come back in index order whatever order the pool returns them in."""
        pool = mocker.MagicMock()
        pool.__enter__.return_value = pool
        pool.map.side_effect = lambda fn, jobs, chunksize: [fn(job) for job in reversed(list(jobs))]
        executor = mocker.patch("tvgroups.services.batch.ProcessPoolExecutor", return_value=pool)

        classifier = BatchClassifier(max_exp=12, bound=2, workers=3)
        rows = classifier.run([sausage_mealy(2), cyclic_shift_mealy(2), lamplighter_mealy()])

        executor.assert_called_once_with(max_workers=3)
        assert [row.index for row in rows] == [0, 1, 2]
        assert [row.signature for row in rows] == [
            "FreeAbelian(1)",
            "ElementaryAbelian(2)",
            "NonAbelian",
        ]

    def test_single_worker_skips_pool(self, mocker: MockerFixture):
        executor = mocker.patch("tvgroups.services.batch.ProcessPoolExecutor")
        BatchClassifier(max_exp=4, bound=1, workers=1).run([cyclic_shift_mealy(1)])
        executor.assert_not_called()
