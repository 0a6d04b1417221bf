#include <algorithm>
#include <initializer_list>
#include <string_view>

#include "hipaa/catalog.hpp"

namespace hipaa {

namespace {

struct SubRuleRow {
    std::string_view id;
    std::initializer_list<std::string_view> patterns;
};

struct RuleRow {
    std::string_view rule_id;
    std::string_view cfr_reference;
    std::initializer_list<SubRuleRow> sub_rules;
};

// Detection patterns per rule. Typesetting escapes in the source table
// (\" \: \/ and \_) are already resolved and list bullets are dropped; the
// wildcard tokens .* and \s* are kept as written. Rules appear in CFR order,
// sub-rules and patterns in table order.
const std::initializer_list<RuleRow> kRuleRows = {
    {"Authorization",
     "164.312(a)(1)",
     {
         {"Authorization Control", {"AuthorizationException"}},
         {"Access Control", {"IllegalAccessException"}},
     }},
    {"Unique_Id",
     "164.312(a)(2)(i)",
     {
         {"PK", {"PRIMARY KEY"}},
     }},
    {"Emergency_EPHI_Access", "164.312(a)(2)(ii)", {}},
    {"Automatic_Session_Timeout",
     "164.312(a)(2)(iii)",
     {
         {"Inactivity", {"public void onUserInteraction()", ".reset()", ".clear()", ".commit()"}},
     }},
    {"EPHI_encryption_decryption",
     "164.312(a)(2)(iv)",
     {
         {"EN-DE", {"import java.util Base64"}},
         {"AES",
          {"import org.springframework.security.crypto", "import java.security.Security;",
           "Cipher.getInstance(\"AES/ECB/", "Cipher.getInstance(\"AES\")", "Cipher.getInstance(AES_MODE",
           "new SecretKeySpec(keyBytes, \"AES\"", "Cipher.getInstance(\"AES/CBC/"}},
         {"DES", {"Cipher.getInstance(.*DES", "Cipher.getInstance(.*des"}},
         {"RSA", {"Cipher.getInstance(\"RSA"}},
         {"BLOWFISH", {".getInstance(.*BLOWFISH"}},
         {"RC", {".getInstance(.*RC2", ".getInstance(.*rc4", ".getInstance(.*RC4", ".getInstance(.*rc2"}},
         {"Message Digest",
          {"MessageDigest", "import java.security.MessageDigest;", ".getInstance(.*MD5", ".getInstance(.*md5",
           "DigestUtils.md5(", "import org.apache.commons.codec.digest.DigestUtils;"}},
         {"SHA", {".getInstance(.*SHA-1", ".getInstance(.*SHA1", "DigestUtils.sha("}},
         {"ECB", {"Cipher.getInstance(\\s*\"\\s*AES/ECB"}},
         {"HMAC",
          {"import org.apache.commons.codec.digest.HmacAlgorithms;",
           "import org.apache.commons.codec.digest.HmacUtils;"}},
     }},
    {"EPHI_Audit_Control",
     "164.312(b)",
     {
         {"Audit", {"AppOpsManager.OnOpNotedCallback"}},
     }},
    {"EPHI_data_integrity",
     "164.312(c)(1)",
     {
         {"authorization_exception", {"AuthorizationException"}},
         {"illegal_access", {"IllegalAccessException"}},
         {"user_authentication_oauth", {"android.accounts.AccountManager", "AccountManager.get("}},
         {"user_authentication_firebase",
          {"FirebaseUser", "sendFirebasePropertyRegisteredUser", "FirebaseUserPropertiesSender",
           "com.google.firebase:firebase-auth", "FirebaseAuth"}},
     }},
    {"EPHI_integrity_verification",
     "164.312(c)(2)",
     {
         {"authorization_exception_on_destroy", {"AuthorizationException"}},
         {"illegal_destruction_restriction", {"IllegalAccessException"}},
     }},
    {"EPHI_authentication",
     "164.312(d)",
     {
         {"FireBaseAuth",
          {"FirebaseUser", "sendFirebasePropertyRegisteredUser", "FirebaseUserPropertiesSender",
           "com.google.firebase:firebase-auth", "FirebaseAuth"}},
         {"aAuth", {"android.accounts.AccountManager", "AccountManager.get(", ".currentUser"}},
     }},
    {"EPHI_Transmission_Security",
     "164.312(e)(1)",
     {
         {"API", {"addRequestProperty(\"Authorization"}},
         {"PKIX", {"PKIXRevocationChecker"}},
         {"TRANS-Data", {"HttpsURLConnection new"}},
     }},
    {"EPHI_Transmission_integrity",
     "164.312(e)(2)(i)",
     {
         {"TRANS-NET", {"javax.net.ssl.TrustManager", "TrustManagerFactory.getInstance("}},
     }},
    {"Appropriate_EPHI_Encryption",
     "164.312(e)(2)(ii)",
     {
         {"DE", {"android.util.Base64", ".decodeToString", ".decode"}},
         {"EN", {"android.util.Base64", ".encodeToString", ".encode"}},
         {"ENCRYPT", {"io.realm.Realm", ".encryptionKey("}},
         {"Chiper", {"net.sqlcipher.", "AS encrypted KEY"}},
     }},
};

constexpr std::string_view kAccessControlAdvice =
    "Use appropriate access control methods to ensure that only authorized individuals can access "
    "sensitive EPHI.";
constexpr std::string_view kEncryptionAdvice = "Use cutting-edge encryption and decryption mechanisms";
constexpr std::string_view kAuditAdvice =
    "Implement audit controls to enable thorough investigation of every incident.";
constexpr std::string_view kSslAdvice = "When integrating external APIs, be sure to use SSL.";

const std::initializer_list<std::pair<std::string_view, std::string_view>> kRecommendations = {
    {"Authorization", kAccessControlAdvice},
    {"EPHI_encryption_decryption", kEncryptionAdvice},
    {"EPHI_Audit_Control", kAuditAdvice},
    {"EPHI_Transmission_Security", kSslAdvice},
    {"EPHI_Transmission_integrity", kSslAdvice},
    {"Appropriate_EPHI_Encryption", kEncryptionAdvice},
};

constexpr std::string_view kBuiltinRulesText = R"rules(# Built-in HIPAA technical safeguard rules (45 CFR 164.312).
#
# [rule] <rule_id> ref=<cfr_reference>
# [subrule] "<sub_rule_id>" mode=<any|all> polarity=<evidence|advisory>
# pattern: <text>     .* = any characters, \s* = spaces/tabs, all else literal
# recommend: <text>

[rule] Authorization ref=164.312(a)(1)
recommend: Use appropriate access control methods to ensure that only authorized individuals can access sensitive EPHI.
[subrule] "Authorization Control" mode=any polarity=evidence
pattern: AuthorizationException
[subrule] "Access Control" mode=any polarity=evidence
pattern: IllegalAccessException

[rule] Unique_Id ref=164.312(a)(2)(i)
[subrule] "PK" mode=any polarity=evidence
pattern: PRIMARY KEY

# No detection patterns exist for emergency access; reported as not checkable.
[rule] Emergency_EPHI_Access ref=164.312(a)(2)(ii)

[rule] Automatic_Session_Timeout ref=164.312(a)(2)(iii)
[subrule] "Inactivity" mode=any polarity=evidence
pattern: public void onUserInteraction()
pattern: .reset()
pattern: .clear()
pattern: .commit()

[rule] EPHI_encryption_decryption ref=164.312(a)(2)(iv)
recommend: Use cutting-edge encryption and decryption mechanisms
[subrule] "EN-DE" mode=any polarity=evidence
pattern: import java.util Base64
[subrule] "AES" mode=any polarity=evidence
pattern: import org.springframework.security.crypto
pattern: import java.security.Security;
pattern: Cipher.getInstance("AES/ECB/
pattern: Cipher.getInstance("AES")
pattern: Cipher.getInstance(AES_MODE
pattern: new SecretKeySpec(keyBytes, "AES"
pattern: Cipher.getInstance("AES/CBC/
[subrule] "DES" mode=any polarity=evidence
pattern: Cipher.getInstance(.*DES
pattern: Cipher.getInstance(.*des
[subrule] "RSA" mode=any polarity=evidence
pattern: Cipher.getInstance("RSA
[subrule] "BLOWFISH" mode=any polarity=evidence
pattern: .getInstance(.*BLOWFISH
[subrule] "RC" mode=any polarity=evidence
pattern: .getInstance(.*RC2
pattern: .getInstance(.*rc4
pattern: .getInstance(.*RC4
pattern: .getInstance(.*rc2
[subrule] "Message Digest" mode=any polarity=evidence
pattern: MessageDigest
pattern: import java.security.MessageDigest;
pattern: .getInstance(.*MD5
pattern: .getInstance(.*md5
pattern: DigestUtils.md5(
pattern: import org.apache.commons.codec.digest.DigestUtils;
[subrule] "SHA" mode=any polarity=evidence
pattern: .getInstance(.*SHA-1
pattern: .getInstance(.*SHA1
pattern: DigestUtils.sha(
[subrule] "ECB" mode=any polarity=evidence
pattern: Cipher.getInstance(\s*"\s*AES/ECB
[subrule] "HMAC" mode=any polarity=evidence
pattern: import org.apache.commons.codec.digest.HmacAlgorithms;
pattern: import org.apache.commons.codec.digest.HmacUtils;

[rule] EPHI_Audit_Control ref=164.312(b)
recommend: Implement audit controls to enable thorough investigation of every incident.
[subrule] "Audit" mode=any polarity=evidence
pattern: AppOpsManager.OnOpNotedCallback

[rule] EPHI_data_integrity ref=164.312(c)(1)
[subrule] "authorization_exception" mode=any polarity=evidence
pattern: AuthorizationException
[subrule] "illegal_access" mode=any polarity=evidence
pattern: IllegalAccessException
[subrule] "user_authentication_oauth" mode=any polarity=evidence
pattern: android.accounts.AccountManager
pattern: AccountManager.get(
[subrule] "user_authentication_firebase" mode=any polarity=evidence
pattern: FirebaseUser
pattern: sendFirebasePropertyRegisteredUser
pattern: FirebaseUserPropertiesSender
pattern: com.google.firebase:firebase-auth
pattern: FirebaseAuth

[rule] EPHI_integrity_verification ref=164.312(c)(2)
[subrule] "authorization_exception_on_destroy" mode=any polarity=evidence
pattern: AuthorizationException
[subrule] "illegal_destruction_restriction" mode=any polarity=evidence
pattern: IllegalAccessException

[rule] EPHI_authentication ref=164.312(d)
[subrule] "FireBaseAuth" mode=any polarity=evidence
pattern: FirebaseUser
pattern: sendFirebasePropertyRegisteredUser
pattern: FirebaseUserPropertiesSender
pattern: com.google.firebase:firebase-auth
pattern: FirebaseAuth
[subrule] "aAuth" mode=any polarity=evidence
pattern: android.accounts.AccountManager
pattern: AccountManager.get(
pattern: .currentUser

[rule] EPHI_Transmission_Security ref=164.312(e)(1)
recommend: When integrating external APIs, be sure to use SSL.
[subrule] "API" mode=any polarity=evidence
pattern: addRequestProperty("Authorization
[subrule] "PKIX" mode=any polarity=evidence
pattern: PKIXRevocationChecker
[subrule] "TRANS-Data" mode=any polarity=evidence
pattern: HttpsURLConnection new

[rule] EPHI_Transmission_integrity ref=164.312(e)(2)(i)
recommend: When integrating external APIs, be sure to use SSL.
[subrule] "TRANS-NET" mode=any polarity=evidence
pattern: javax.net.ssl.TrustManager
pattern: TrustManagerFactory.getInstance(

[rule] Appropriate_EPHI_Encryption ref=164.312(e)(2)(ii)
recommend: Use cutting-edge encryption and decryption mechanisms
[subrule] "DE" mode=any polarity=evidence
pattern: android.util.Base64
pattern: .decodeToString
pattern: .decode
[subrule] "EN" mode=any polarity=evidence
pattern: android.util.Base64
pattern: .encodeToString
pattern: .encode
[subrule] "ENCRYPT" mode=any polarity=evidence
pattern: io.realm.Realm
pattern: .encryptionKey(
[subrule] "Chiper" mode=any polarity=evidence
pattern: net.sqlcipher.
pattern: AS encrypted KEY
)rules";

} // namespace

const std::vector<SafeguardRef>& technical_safeguards() {
    static const std::vector<SafeguardRef> safeguards = {
        {"164.312(a)(1)", "Authorization",
         "Implement technological policies and procedures to restrict access to individuals or software "
         "programs that have been given access privileges for electronic information systems that "
         "maintain EPHI."},
        {"164.312(a)(2)(i)", "Unique Id",
         "Assign a unique name or number to each patient in order to identify and monitor their "
         "identification."},
        {"164.312(a)(2)(ii)", "Emergency EPHI Access",
         "Create and use processes for acquiring required digitally protected health information in an "
         "emergency."},
        {"164.312(a)(2)(iii)", "Automatic Session timeout",
         "Implement software procedures that end a session after a certain period of inactivity."},
        {"164.312(a)(2)(iv)", "EPHI Encryption and Decryption",
         "Implement a system for encrypting and decrypting EPHI."},
        {"164.312(b)", "EPHI Audit Control",
         "Implement methods for recording and examining activities in information systems that use or "
         "include EPHI."},
        {"164.312(c)(1)", "EPHI Data Integrity",
         "Implement regulations and procedures to prevent unauthorized manipulation or destruction of "
         "EPHI."},
        {"164.312(c)(2)", "EPHI Integrity Verification",
         "Utilize technological tools to verify that electronically stored protected health information "
         "has not been tampered with or deleted without authorization."},
        {"164.312(d)", "EPHI Authentication",
         "Establish processes to confirm that the individual or organization requesting access to EPHI is "
         "who is being identified."},
        {"164.312(e)(1)", "EPHI Transmission Security",
         "Implement technological security measures to prevent unauthorized access to digitally protected "
         "health information that is being sent through a network of electronic communications."},
        {"164.312(e)(2)(i)", "EPHI Transmission Integrity",
         "Implement security measures to guarantee that electronically transmitted protected health "
         "information is not improperly altered up to disposal without being noticed."},
        {"164.312(e)(2)(ii)", "Appropriate EPHI Encryption",
         "Implement a mechanism to encrypt EPHI whenever deemed appropriate."},
    };
    return safeguards;
}

const SafeguardRef* find_safeguard(std::string_view cfr_reference) {
    for (const auto& safeguard : technical_safeguards()) {
        if (safeguard.cfr_reference == cfr_reference) {
            return &safeguard;
        }
    }
    return nullptr;
}

std::string_view builtin_rules_text() { return kBuiltinRulesText; }

Catalog builtin_catalog(Profile profile) {
    static const Catalog paper = [] {
        std::vector<SafeguardRule> rules;
        for (const RuleRow& row : kRuleRows) {
            SafeguardRule rule;
            rule.rule_id = std::string(row.rule_id);
            rule.safeguard = *find_safeguard(row.cfr_reference);
            for (const SubRuleRow& sub_row : row.sub_rules) {
                SubRule sub;
                sub.id = std::string(sub_row.id);
                for (std::string_view pattern : sub_row.patterns) {
                    sub.patterns.emplace_back(pattern);
                }
                rule.sub_rules.push_back(std::move(sub));
            }
            rules.push_back(std::move(rule));
        }
        std::map<std::string, std::string> recommendations;
        for (const auto& [rule_id, text] : kRecommendations) {
            recommendations.emplace(rule_id, text);
        }
        return Catalog(std::move(rules), std::move(recommendations));
    }();
    return profile == Profile::paper ? paper : apply_profile(paper, profile);
}

Catalog apply_profile(const Catalog& catalog, Profile profile) {
    if (profile == Profile::paper) {
        return catalog;
    }
    static constexpr std::string_view kWeakMechanisms[] = {"DES", "RC", "Message Digest", "SHA", "ECB",
                                                           "BLOWFISH"};
    std::vector<SafeguardRule> rules = catalog.rules();
    for (auto& rule : rules) {
        for (auto& sub : rule.sub_rules) {
            for (std::string_view weak : kWeakMechanisms) {
                if (sub.id == weak) {
                    sub.polarity = Polarity::advisory;
                }
            }
            if (sub.id == "EN-DE") {
                const std::string dotted = "import java.util.Base64";
                if (std::find(sub.patterns.begin(), sub.patterns.end(), dotted) == sub.patterns.end()) {
                    sub.patterns.push_back(dotted);
                }
            }
        }
    }
    return Catalog(std::move(rules), catalog.recommendations());
}

} // namespace hipaa
