import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from navbeacon.intent import (
    BackendConfig,
    IntentResult,
    Keyword,
    LabelValidationError,
    ResponseParseError,
    TransportError,
    Utterance,
    detect_keyword,
    edit_distance,
    extract_labels_fallback,
    extract_labels_llm,
    interpret,
    normalize_text,
    transcribe,
)

from conftest import make_wav

EXPERIMENT_LABELS = [
    "Tissue box",
    "Chair",
    "Water bottle",
    "Coffee machine",
    "Flower pot",
    "Television",
]


def cfg_for(stub, **kw):
    return BackendConfig(stt_url=stub.stt_url, llm_url=stub.llm_url, timeout=2.0, **kw)


DEAD_CFG = BackendConfig(
    stt_url="http://127.0.0.1:1/stt", llm_url="http://127.0.0.1:1/llm", timeout=0.2
)


class TestUtterance:
    def test_needs_exactly_one_payload(self):
        with pytest.raises(ValueError):
            Utterance(0.0, 1.0)
        with pytest.raises(ValueError):
            Utterance(0.0, 1.0, text="hi", audio=b"x")

    def test_needs_positive_span(self):
        with pytest.raises(ValueError):
            Utterance(1.0, 1.0, text="hi")


class TestTranscribe:
    def test_text_passthrough(self):
        u = Utterance(0.0, 1.0, text="go")
        assert transcribe(u, DEAD_CFG) == "go"

    def test_audio_roundtrip_through_stub(self, stub_server):
        stub = stub_server(stt_text="make an object here facing chair")
        u = Utterance(0.0, 1.0, audio=make_wav(np.zeros(16000)))
        assert transcribe(u, cfg_for(stub)) == "make an object here facing chair"
        assert stub.stt_calls == 1

    def test_empty_transcript_is_valid(self, stub_server):
        stub = stub_server(stt_text="")
        u = Utterance(0.0, 1.0, audio=make_wav(np.zeros(16000)))
        assert transcribe(u, cfg_for(stub)) == ""

    def test_unreachable_backend_is_transport_error(self):
        u = Utterance(0.0, 1.0, audio=b"RIFF")
        with pytest.raises(TransportError):
            transcribe(u, DEAD_CFG)


class TestExtractLabelsLlm:
    def test_wellformed_passthrough(self, stub_server):
        stub = stub_server(llm_handler=lambda text, labels: ["Tissue box"])
        result = extract_labels_llm("whatever", ["Tissue box", "Chair"], cfg_for(stub))
        assert result.labels == ("Tissue box",)

    def test_non_json_reply_is_parse_error(self, stub_server):
        stub = stub_server(llm_raw_body=b"sure!")
        with pytest.raises(ResponseParseError):
            extract_labels_llm("x", ["Chair"], cfg_for(stub))

    def test_unknown_label_is_validation_error(self, stub_server):
        stub = stub_server(llm_handler=lambda text, labels: ["Unicorn"])
        with pytest.raises(LabelValidationError):
            extract_labels_llm("x", ["Chair", "TV"], cfg_for(stub))

    def test_result_uses_stored_spelling(self, stub_server):
        stub = stub_server(llm_handler=lambda text, labels: ["tissue  BOX"])
        result = extract_labels_llm("x", ["Tissue box"], cfg_for(stub))
        assert result.labels == ("Tissue box",)

    def test_order_preserved(self, stub_server):
        stub = stub_server(llm_handler=lambda text, labels: ["TV", "Chair"])
        result = extract_labels_llm("x", ["Chair", "TV"], cfg_for(stub))
        assert result.labels == ("TV", "Chair")


class TestFallback:
    def test_prompt_format_sentence(self):
        result = extract_labels_fallback(
            "Make an object here facing Tissue box", ["Tissue box", "Chair"]
        )
        assert result.labels == ("Tissue box",)

    def test_degraded_transcript_recovers(self):
        # garbled STT output must still land on the right label
        result = extract_labels_fallback(
            "An object here facing a Tish box", EXPERIMENT_LABELS
        )
        assert result.labels == ("Tissue box",)

    def test_multiple_labels_in_mention_order(self):
        result = extract_labels_fallback(
            "facing the chair then the TV", ["Chair", "TV", "Tissue box"]
        )
        assert result.labels == ("Chair", "TV")

    def test_empty_transcript(self):
        result = extract_labels_fallback("", EXPERIMENT_LABELS)
        assert result.empty

    def test_unrelated_text_matches_nothing(self):
        result = extract_labels_fallback("please restart the experiment now", EXPERIMENT_LABELS)
        assert result.labels == ()

    def test_all_experiment_objects_match_prompt(self):
        for name in EXPERIMENT_LABELS:
            result = extract_labels_fallback(
                f"Make an object here facing {name}", EXPERIMENT_LABELS
            )
            assert result.labels == (name,), name

    @given(st.permutations(EXPERIMENT_LABELS))
    @settings(max_examples=50)
    def test_order_follows_first_mention(self, order):
        text = "facing " + " and then ".join(name.lower() for name in order)
        result = extract_labels_fallback(text, EXPERIMENT_LABELS)
        assert list(result.labels) == list(order)

    @given(st.text(max_size=80))
    @settings(max_examples=80)
    def test_deterministic_and_sound(self, text):
        a = extract_labels_fallback(text, EXPERIMENT_LABELS)
        b = extract_labels_fallback(text, EXPERIMENT_LABELS)
        assert a == b
        for label in a.labels:
            assert label in EXPERIMENT_LABELS


class TestKeyword:
    def test_exact_words(self):
        assert detect_keyword("go") == Keyword.GO
        assert detect_keyword("Delete!") == Keyword.DELETE
        assert detect_keyword("take") == Keyword.TAKE

    def test_substring_is_not_a_keyword(self):
        assert detect_keyword("golang is deleterious") is None

    def test_first_keyword_wins(self):
        assert detect_keyword("take it and go") == Keyword.TAKE


class TestInterpret:
    def test_llm_down_falls_back(self, stub_server):
        stub = stub_server(llm_status=503)
        u = Utterance(0.0, 1.0, text="facing chair")
        result = interpret(u, ["Chair"], cfg_for(stub))
        assert result.labels == ("Chair",)
        assert stub.llm_calls == 1

    def test_go_is_keyword_not_labels(self, stub_server):
        stub = stub_server()
        result = interpret(Utterance(0.0, 1.0, text="go"), ["Chair"], cfg_for(stub))
        assert result.keyword == Keyword.GO
        assert result.labels == ()

    def test_delete_keyword(self, stub_server):
        stub = stub_server()
        result = interpret(Utterance(0.0, 1.0, text="delete"), ["Chair"], cfg_for(stub))
        assert result.keyword == Keyword.DELETE

    def test_uninterpretable_is_empty_not_raise(self):
        result = interpret(Utterance(0.0, 1.0, text="mumble"), ["Chair"], DEAD_CFG)
        assert result.empty

    def test_stt_down_yields_empty(self):
        u = Utterance(0.0, 1.0, audio=b"RIFF")
        result = interpret(u, ["Chair"], DEAD_CFG)
        assert result.empty and result.raw_text == ""

    def test_fallback_disabled_propagates(self, stub_server):
        stub = stub_server(llm_status=503)
        cfg = cfg_for(stub, fallback_enabled=False)
        with pytest.raises(TransportError):
            interpret(Utterance(0.0, 1.0, text="facing chair"), ["Chair"], cfg)

    def test_labels_win_over_keyword(self, stub_server):
        stub = stub_server()  # containment matcher finds "chair"
        result = interpret(
            Utterance(0.0, 1.0, text="go to the chair"), ["Chair"], cfg_for(stub)
        )
        assert result.labels == ("Chair",)
        assert result.keyword is None


class TestHelpers:
    def test_normalize_strips_punctuation_and_case(self):
        assert normalize_text("Make, an Object!  here") == "make an object here"

    def test_edit_distance_known_values(self):
        assert edit_distance("", "") == 0
        assert edit_distance("abc", "abc") == 0
        assert edit_distance("kitten", "sitting") == 3
        assert edit_distance("tish box", "tissue box") == 3

    def test_intent_result_exclusivity(self):
        with pytest.raises(ValueError):
            IntentResult(labels=("Chair",), keyword=Keyword.GO)
