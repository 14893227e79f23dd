// Built-in copies of the shipped data files. The files under data/ are the
// editable source of truth for operators; these constants keep the library
// usable without an install prefix and are asserted equal to the files in
// the test suite.

#include <string_view>

#include "core/behavior_kb.hpp"
#include "core/prompt.hpp"

namespace mloc::kb {

namespace {

constexpr std::string_view kBehaviors = R"(# Malicious behavior taxonomy: 12 entries, `[id] Name` followed by the
# description used verbatim in Phase-1 prompts. Ids and names are fixed;
# descriptions are editable prompt content. These descriptions are
# project-authored stand-ins, not a published reference text.

[1] Privacy Stealing
Privacy Stealing: the app collects private user data without consent and moves it off the
device. Typical signs: querying the contacts, SMS, call-log or calendar
content providers, reading device identifiers (IMEI, phone number, installed
accounts), grabbing location fixes, then sending the data to a remote server
over HTTP/S or sockets, or handing it to a background service for upload.

[2] SMS/CALL Abuse
SMS/CALL Abuse: the app sends SMS messages or places calls without user action, or tampers
with incoming ones. Typical signs: SmsManager.sendTextMessage calls with no
user-facing flow, registering a high-priority SMS_RECEIVED receiver and
calling abortBroadcast to suppress messages, auto-replying, deleting
messages from the SMS store, or silently forwarding calls.

[3] Remote Control
Remote Control: the app takes commands from a remote party. Typical signs: a long-lived
background service polling a command server or holding a socket open,
parsing command payloads and dispatching actions (send SMS, fetch files,
install packages), push-message-triggered execution, or device-admin powers
used to keep the channel alive.

[4] Bank/Financial Stealing
Bank/Financial Stealing: the app targets banking or payment credentials. Typical signs: overlay
windows drawn above banking apps, fake login screens mimicking financial
brands, monitoring the foreground task to detect banking apps, intercepting
SMS one-time codes, or scraping account data through accessibility events.

[5] Ransom
Ransom: the app locks the user out or encrypts data and demands payment. Typical
signs: persistent fullscreen windows that cannot be dismissed, device-admin
lock abuse, resetting lock credentials, bulk file encryption loops over
external storage, and ransom notes with payment instructions.

[6] Accessibility Abuse
Accessibility Abuse: the app abuses accessibility services to act on the user's behalf. Typical
signs: pushing the user to enable an AccessibilityService, reading window
content and node trees, injecting clicks and gestures to auto-accept
dialogs, granting itself permissions, or blocking uninstall screens.

[7] Privilege Escalation
Privilege Escalation: the app tries to gain capabilities beyond its sandbox. Typical signs:
bundled root exploits, executing `su` or shell commands, remounting system
partitions, coercing the user into granting device administrator rights, or
abusing platform bugs to elevate.

[8] Stealthy Download
Stealthy Download: the app fetches and installs additional code without consent. Typical
signs: downloading APK or DEX payloads in the background, invoking the
package installer silently or via deception, and loading fetched code at
runtime through DexClassLoader or similar.

[9] Aggressive Advertising
Aggressive Advertising: the app monetizes through abusive ad behavior. Typical signs: fullscreen
or out-of-context ads, ad views layered under transparent overlays so user
touches become ad clicks, programmatic click injection on ad URLs,
notification or shortcut spam, and ad traffic generated while the app is
not in use.

[10] Miner
Miner: the app mines cryptocurrency on the device. Typical signs: embedded mining
libraries, persistent CPU-intensive hashing loops, connections to mining
pools or stratum endpoints, and throttling logic that hides activity while
the screen is on.

[11] Tricky Behavior
Tricky Behavior: the app deceives the user about its identity or presence. Typical signs:
hiding the launcher icon after first run, switching the app label or icon
to mimic system apps, fake system dialogs, masquerading as a legitimate
messenger or updater, and tricks that make uninstalling harder.

[12] Premium Service Abuse
Premium Service Abuse: the app signs the user up for paid services. Typical signs: sending SMS to
premium short codes, invisible WAP-billing subscriptions, auto-confirming
subscription dialogs, and intercepting or hiding carrier confirmation
messages so charges go unnoticed.
)";

constexpr std::string_view kFamilies = R"(# Family -> behavior lookup table: `family: id, id, ...` per line, ids
# referring to the 12-entry taxonomy. Family matching is case-insensitive.
# Samples whose family is missing from this table fall back to the
# configured unknown-family policy (default: probe all 12 behaviors).

rumms: 1, 2, 3, 4, 11
)";

}  // namespace

std::string_view default_behaviors_text() { return kBehaviors; }
std::string_view default_families_text() { return kFamilies; }

}  // namespace mloc::kb

namespace mloc::prompt {

namespace {

constexpr std::string_view kBaseline =
    R"(Context:
You are an expert in Android malware analysis. Analyze the following Smali class and determine if it implements any malicious behaviors.

Input - Smali Class:
{class_content}

Possible Malicious Behaviors:
{behavior_list}

Instruction:
Use the following format:
IS_MALICIOUS: <yes or no>
CONFIDENCE: <confidence score 0-100>
EXPLANATION: <detailed explanation>
BEHAVIOR: <comma-separated behaviors>

METHOD: <method signature>
ROLE: <role description>
METHOD: <...>
ROLE: <...>
)";

constexpr std::string_view kPhase1 =
    R"(Context:
You are an expert in Android malware analysis. Analyze the following Smali class and determine if it implements one or several of the specified malicious behaviors.

Input - Smali Class:
{class_content}

Input - Malicious Behaviors to Look For:
{behavior_description}

Instruction:
Use the following format in your response:
IS_MALICIOUS: <yes or no>
CONFIDENCE: <confidence score 0-100>
EXPLANATION: <detailed explanation>

Do not include any other text, markdown, or formatting.
)";

constexpr std::string_view kPhase2 =
    R"(Context:
The following Smali class has been identified as implementing one or several malicious behaviors in the first phase.
Analyze the class and identify all methods that are involved in implementing these behaviors.

Input - First Phase Explanation of Identified Malicious Behavior(s):
{first_phase_explanation}

Input - Smali Class:
{class_content}

Instruction:
IMPORTANT: For each method involved in the behavior, output the following fields, one per line, for each method:
METHOD: <first line of method>
ROLE: <role description>
CONFIDENCE: <confidence score 0-100>
)";

}  // namespace

std::string_view default_template_text(PromptKind kind) {
    switch (kind) {
        case PromptKind::Baseline: return kBaseline;
        case PromptKind::Phase1: return kPhase1;
        case PromptKind::Phase2: return kPhase2;
    }
    return {};
}

}  // namespace mloc::prompt
