import pytest
from hypothesis import given, strategies as st

from vrprivacy.policy import UNKNOWN, detect_language
from vrprivacy.policy.langdetect import LANGUAGES, load_profiles, out_of_place, ranked_profile

# written for these tests; none of it appears in the shipped training samples
SAMPLES = {
    "en": "If you delete your account we remove your saved games and any messages you sent to other players.",
    "de": "Wenn Sie Ihr Konto löschen, entfernen wir Ihre gespeicherten Spielstände und alle Nachrichten an andere Spieler.",
    "fr": "Si vous supprimez votre compte, nous effaçons vos parties sauvegardées et les messages envoyés aux autres joueurs.",
    "es": "Si eliminas tu cuenta, borramos tus partidas guardadas y los mensajes que enviaste a otros jugadores.",
    "vi": "Nếu bạn xóa tài khoản, chúng tôi sẽ xóa các trò chơi đã lưu và tin nhắn bạn gửi cho người chơi khác.",
    "zh": "如果您删除帐户，我们将移除您保存的游戏进度以及您发送给其他玩家的所有消息。删除操作无法撤销，请谨慎处理。",
    "ja": "アカウントを削除すると、保存されたゲームの進行状況と他のプレイヤーに送信したメッセージがすべて削除されます。",
    "ko": "계정을 삭제하면 저장된 게임 진행 상황과 다른 플레이어에게 보낸 모든 메시지가 삭제됩니다.",
}


@pytest.mark.parametrize("lang", sorted(SAMPLES))
def test_detects_each_language(lang):
    assert detect_language(SAMPLES[lang]) == lang


def test_short_input_unknown():
    assert detect_language("Hello there") == UNKNOWN
    assert detect_language(" " * 100) == UNKNOWN


def test_han_majority_is_zh():
    text = "隐私政策说明我们如何收集使用和保护您的个人信息以及您享有的权利和选择方式，并告诉您如何联系我们" + "abc"
    assert detect_language(text) == "zh"


def test_profiles_shipped_for_all_languages():
    profiles = load_profiles()
    assert set(profiles) == set(LANGUAGES)
    assert all(0 < len(p) <= 300 for p in profiles.values())


def test_out_of_place_identity_is_zero():
    prof = ranked_profile(SAMPLES["en"] * 3)
    assert out_of_place(prof, prof) == 0
    assert out_of_place(prof, ["zzz"]) > 0


@given(st.text(max_size=39))
def test_below_threshold_always_unknown(text):
    assert detect_language(text) == UNKNOWN


@given(st.text(min_size=40, max_size=200))
def test_always_returns_known_value(text):
    assert detect_language(text) in set(LANGUAGES) | {UNKNOWN}
