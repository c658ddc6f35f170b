"""Smoke test for the isneak Python extension.

Build and install first:
    pip install --no-build-isolation ./crates/python
then run:
    python python/smoke_test.py
"""

import isneak


def main():
    assert isneak.hamlet(0.999, 0.01) == 688

    model = isneak.Model.synthetic(60, 0.25, seed=3)
    assert model.num_vars == 60
    assert [g for g, _ in model.goals] == ["effort", "cost", "defects", "success"]

    pool = model.enumerate(count=800, seed=1)
    assert len(pool) == 800
    order = pool.rank()
    assert sorted(order) == list(range(800))
    assert pool.d2h(order[0]) == 0.0

    run = isneak.run_isneak_auto(pool, seed=1)
    assert run["algorithm"] == "isneak"
    assert run["valid_fraction"] == 1.0
    assert run["log"]["I"] > 0
    assert all(1 <= s <= isneak.DEFAULT_QUESTION_SIZE for s in run["log"]["sizes"])
    score = isneak.score_run(pool, run)
    assert 0.0 <= score < 1.0

    # driving the search by hand: always prefer the first option
    session = isneak.Session(pool, seed=2)
    asked = 0
    while (q := session.next_question()) is not None:
        assert len(q["optionA"]) == len(q["optionB"]) <= 6
        session.answer("A")
        asked += 1
    manual = session.finish()
    assert manual["log"]["I"] == asked

    flash = isneak.run_flash(pool, seed=1)
    assert flash["log"]["y_evaluations"] == 120
    nga = isneak.run_nga(pool, seed=1, generations=5)
    assert nga["log"]["y_evaluations"] == 500

    csv = isneak.run_bench([("m60", pool)], ["isneak", "flash"], repeats=2, seed0=1)
    assert csv.splitlines()[0] == "model,algorithm,seed,d2h,I,median_S,valid_fraction,y_evals,ms"
    assert len(csv.splitlines()) == 5

    table = isneak.Pool.from_csv(
        "a,b,y\n" + "".join(f"{i % 2},{i % 3},{i}\n" for i in range(20)),
        '{"objectives":[{"column":"y","goal":"minimize"}]}',
    )
    assert table.attributes == ["a", "b"]

    print(f"ok: I={run['log']['I']} d2h={score:.3f} selected={len(run['selected'])} manual I={asked}")


if __name__ == "__main__":
    main()
