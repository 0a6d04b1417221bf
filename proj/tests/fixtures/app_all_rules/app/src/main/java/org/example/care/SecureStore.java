package org.example.care;

import android.util.Base64;
import java.security.Security;
import javax.crypto.Cipher;
import javax.net.ssl.TrustManager;

public class SecureStore {
    private static final String AES_MODE = "AES/GCM/NoPadding";

    byte[] seal(byte[] keyBytes, byte[] data) throws Exception {
        Cipher cipher = Cipher.getInstance(AES_MODE);
        cipher.init(Cipher.ENCRYPT_MODE, new javax.crypto.spec.SecretKeySpec(keyBytes, "AES"));
        return Base64.encode(cipher.doFinal(data), Base64.NO_WRAP);
    }

    void pin() throws Exception {
        javax.net.ssl.TrustManagerFactory tmf = TrustManagerFactory.getInstance("X509");
        java.security.cert.PKIXRevocationChecker checker = null;
    }
}
