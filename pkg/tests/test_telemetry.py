import csv
import io

from imlgraph.telemetry import CSV_COLUMNS, CSV_HEADER, SessionLog, log_interaction

EXPECTED_HEADER = (
    "condition,graphID,taskID,startTime,endTime,duration,"
    "correctAnswerProvided,numberOfInteractions,numberOfExpansions,"
    "numberOfProjections,numberOfOverviews,numberOfSphericalViews,accuracy"
)


def test_header_is_exact():
    assert CSV_HEADER == EXPECTED_HEADER
    assert CSV_COLUMNS == EXPECTED_HEADER.split(",")


def test_interaction_mapping():
    log = SessionLog()
    for cmd in ["expandCommunity", "expandCommunity", "projectCommunity",
                "loadGraph", "expandNetwork", "highlightNode", "clearHighlight"]:
        log_interaction(log, cmd)
    assert log.counters() == {
        "numberOfInteractions": 7,
        "numberOfExpansions": 2,
        "numberOfProjections": 1,
        "numberOfOverviews": 1,
        "numberOfSphericalViews": 1,
    }


def test_row_formatting():
    log = SessionLog(
        condition="MULTI",
        graph_id="medium",
        task_id="t1",
        start_time=100.0,
        end_time=103.4567,
        correct_answer_provided=True,
        accuracy=0.654321,
    )
    row = log.row()
    assert row[0] == "MULTI"
    assert row[3] == "100.000"
    assert row[4] == "103.457"
    assert row[5] == "3.457"
    assert row[6] == "true"
    assert row[-1] == "0.6543"


def test_bool_lowercase_false():
    log = SessionLog(start_time=0.0, end_time=1.0)
    assert log.row()[6] == "false"


def test_csv_round_trips_through_reader():
    log = SessionLog(graph_id="easy", task_id="t2", start_time=5.0, end_time=9.0)
    log_interaction(log, "expandNetwork")
    text = log.to_csv()
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == CSV_COLUMNS
    rec = dict(zip(rows[0], rows[1]))
    assert rec["graphID"] == "easy"
    assert rec["duration"] == "4.000"
    assert rec["numberOfInteractions"] == "1"
    assert rec["numberOfSphericalViews"] == "1"


def test_open_session_uses_now():
    log = SessionLog(start_time=50.0)
    row = log.row(now=60.5)
    assert row[4] == "60.500"
    assert row[5] == "10.500"
